//! Monte-Carlo sweeps over (SNR, M, K) and their CSV output.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::geometry::{distance, NodeLayout, SPEED_OF_LIGHT};
use crate::harness::config::SweepConfig;
use crate::harness::scene::{random_scene, DelayWindow};
use crate::metrics::summarize;
use crate::pipeline::{TrialContext, TrialOutcome, TrialSeeds};
use crate::rng::{derive_seed, stream, Stream};
use crate::{Error, Result};

const SCENE_DOMAIN: u64 = 0x5343_454e_45;

pub const CSV_HEADER: &str = "snr_db,M,K,P,mse,p_d,srp,mean_runtime_ms,mapping_failures";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub snr_db: f64,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "P")]
    pub p: usize,
    pub mse: Option<f64>,
    pub p_d: f64,
    pub srp: f64,
    pub mean_runtime_ms: Option<f64>,
    pub mapping_failures: usize,
}

impl ResultRow {
    pub fn to_csv_line(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.snr_db,
            self.m,
            self.k,
            self.p,
            opt(self.mse),
            self.p_d,
            self.srp,
            opt(self.mean_runtime_ms),
            self.mapping_failures
        )
    }
}

/// Indices of one grid point into the sweep axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct GridIndex {
    pub snr: usize,
    pub m: usize,
    pub k: usize,
}

impl SweepConfig {
    /// Grid points in output order: SNR outermost, then M, then K.
    pub fn grid(&self) -> Vec<GridIndex> {
        let mut out = Vec::with_capacity(self.grid_points());
        for snr in 0..self.axes.snr_db.len() {
            for m in 0..self.axes.ris_elements.len() {
                for k in 0..self.axes.targets.len() {
                    out.push(GridIndex { snr, m, k });
                }
            }
        }
        out
    }

    pub fn trial_seed(&self, g: GridIndex, trial: usize) -> u64 {
        derive_seed(self.master_seed, &[g.snr as u64, g.m as u64, g.k as u64, trial as u64])
    }

    /// Seed of the scene and path gains. It ignores the SNR and M indices so
    /// that curves over those axes compare the same scenes.
    pub fn scene_seed(&self, g: GridIndex, trial: usize) -> u64 {
        derive_seed(self.master_seed, &[SCENE_DOMAIN, g.k as u64, trial as u64])
    }

    pub fn delay_window(&self, layout: &NodeLayout) -> DelayWindow {
        DelayWindow {
            sample_rate_hz: self.scenario.sample_rate_hz,
            period_samples: self.scenario.zc_length,
            guard_samples: self.estimator.guard_samples,
            direct_delay_s: self
                .estimator
                .reject_direct_path
                .then(|| distance(layout.ap, layout.pr) / SPEED_OF_LIGHT),
        }
    }
}

/// One trial of a sweep: a fresh scene followed by the localization pipeline.
pub fn run_sweep_trial(config: &SweepConfig, ctx: &TrialContext, g: GridIndex, trial: usize) -> Result<TrialOutcome> {
    let seeds = TrialSeeds {
        trial: config.trial_seed(g, trial),
        gains: config.scene_seed(g, trial),
    };
    let layout = config.scenario.layout()?;
    let k = config.axes.targets[g.k];
    let targets = random_scene(
        &mut stream(seeds.gains, Stream::Scene),
        k,
        &layout,
        &config.scene,
        &config.delay_window(&layout),
    )?;
    let scenario = config
        .scenario
        .build(config.axes.snr_db[g.snr], config.axes.ris_elements[g.m], targets)?;
    ctx.run_trial_seeded(&scenario, &config.estimator, seeds)
}

/// All outcomes of one grid point plus the per-trial wall-clock times.
pub fn run_point(config: &SweepConfig, ctx: &TrialContext, g: GridIndex) -> Result<(Vec<TrialOutcome>, Vec<f64>)> {
    let res: Vec<Result<(TrialOutcome, f64)>> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let start = Instant::now();
            let o = run_sweep_trial(config, ctx, g, t)?;
            Ok((o, start.elapsed().as_secs_f64() * 1e3))
        })
        .collect();
    let mut outcomes = Vec::with_capacity(config.trials);
    let mut times = Vec::with_capacity(config.trials);
    for r in res {
        let (o, t) = r?;
        outcomes.push(o);
        times.push(t);
    }
    Ok((outcomes, times))
}

pub fn summarize_point(config: &SweepConfig, g: GridIndex, outcomes: &[TrialOutcome], times_ms: &[f64]) -> ResultRow {
    let report = summarize(outcomes, config.metrics.srp_epsilon_m, config.metrics.srp_strict);
    ResultRow {
        snr_db: config.axes.snr_db[g.snr],
        m: config.axes.ris_elements[g.m],
        k: config.axes.targets[g.k],
        p: report.trials,
        mse: report.mse,
        p_d: report.p_d,
        srp: report.srp,
        mean_runtime_ms: (config.record_timing && !times_ms.is_empty())
            .then(|| times_ms.iter().sum::<f64>() / times_ms.len() as f64),
        mapping_failures: report.mapping_failures,
    }
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::config("threads", e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs every grid point; rows come back in grid order.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let ctx = TrialContext::new(config.scenario.zc_length, config.scenario.zc_root)?;
    with_pool(config.threads, || {
        config
            .grid()
            .into_iter()
            .map(|g| {
                let (outcomes, times) = run_point(config, &ctx, g)?;
                Ok(summarize_point(config, g, &outcomes, &times))
            })
            .collect()
    })?
}

pub fn write_csv<W: Write>(rows: &[ResultRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.to_csv_line())?;
    }
    out.flush()
}

/// Path of the JSON file that records the resolved config next to a CSV.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Validates, opens the output (failing before any computation), runs the
/// sweep and writes the CSV plus its config sidecar.
pub fn simulate(config: &SweepConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| Error::Io { path, source }
    };
    let output = match &config.output {
        Some(path) => {
            let file = File::create(path).map_err(io_err(path))?;
            let side = sidecar_path(path);
            let side_file = File::create(&side).map_err(io_err(&side))?;
            Some((path.clone(), file, side, side_file))
        }
        None => None,
    };
    let rows = run_sweep(config)?;
    match output {
        Some((path, file, side, side_file)) => {
            write_csv(&rows, BufWriter::new(file)).map_err(io_err(&path))?;
            let json = serde_json::to_string_pretty(config)
                .map_err(|e| Error::config("<document>", e.to_string()))?;
            let mut w = BufWriter::new(side_file);
            writeln!(w, "{json}").and_then(|_| w.flush()).map_err(io_err(&side))?;
        }
        None => write_csv(&rows, std::io::stdout().lock()).map_err(io_err(Path::new("<stdout>")))?,
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SweepConfig {
        let mut c = SweepConfig::default();
        c.trials = 3;
        c.record_timing = false;
        c.axes.snr_db = vec![0.0];
        c.axes.ris_elements = vec![16];
        c.axes.targets = vec![1, 2];
        c
    }

    #[test]
    fn csv_formats_missing_values_as_empty() {
        let row = ResultRow {
            snr_db: -20.0,
            m: 64,
            k: 2,
            p: 50,
            mse: None,
            p_d: 0.5,
            srp: 0.25,
            mean_runtime_ms: None,
            mapping_failures: 0,
        };
        assert_eq!(row.to_csv_line(), "-20,64,2,50,,0.5,0.25,,0");
    }

    #[test]
    fn rows_follow_grid_order() {
        let rows = run_sweep(&small()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!((rows[0].k, rows[1].k), (1, 2));
        assert!(rows.iter().all(|r| r.p == 3 && r.mean_runtime_ms.is_none()));
    }

    #[test]
    fn same_config_same_rows() {
        let mut c = small();
        c.trials = 1;
        assert_eq!(run_sweep(&c).unwrap(), run_sweep(&c).unwrap());
    }

    #[test]
    fn unwritable_output_fails_before_running() {
        let mut c = small();
        c.trials = 1_000_000;
        c.output = Some(PathBuf::from("/nonexistent-dir/out.csv"));
        let start = Instant::now();
        assert!(matches!(simulate(&c), Err(Error::Io { .. })));
        assert!(start.elapsed().as_secs() < 5);
    }

    #[test]
    fn seeds_differ_across_grid_and_trials() {
        let c = small();
        let g = GridIndex { snr: 0, m: 0, k: 0 };
        let h = GridIndex { snr: 0, m: 0, k: 1 };
        assert_ne!(c.trial_seed(g, 0), c.trial_seed(g, 1));
        assert_ne!(c.trial_seed(g, 0), c.trial_seed(h, 0));
    }
}
