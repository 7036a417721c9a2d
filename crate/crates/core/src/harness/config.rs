//! Sweep configuration, stored as TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{DelayMode, EpochCounts, GainPolicy, Scenario};
use crate::geometry::{bearing_deg, NodeLayout, Point, SPEED_OF_LIGHT};
use crate::harness::scene::SceneConstraints;
use crate::pipeline::EstimatorParams;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Axes {
    pub snr_db: Vec<f64>,
    /// RIS element counts M.
    pub ris_elements: Vec<usize>,
    /// Target counts K.
    pub targets: Vec<usize>,
}

impl Default for Axes {
    fn default() -> Self {
        Self {
            snr_db: vec![0.0],
            ris_elements: vec![64],
            targets: vec![2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub ap: Point,
    pub ris: Point,
    pub pr: Point,
    /// Cell width and height in meters; the cell spans `[0, w] x [0, h]`.
    pub cell: [f64; 2],
    pub ris_boresight_deg: f64,
    /// Defaults to facing the RIS.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pr_boresight_deg: Option<f64>,
    pub pr_antennas: usize,
    pub zc_length: usize,
    pub zc_root: usize,
    pub sample_rate_hz: f64,
    pub epochs_initial: usize,
    pub epochs_directed: usize,
    /// AP -> PR line of sight.
    pub ap_los: bool,
    /// Target -> PR line of sight, applied to every target.
    pub target_los: bool,
    /// Ignore the SNR axis and run without receiver noise.
    pub noiseless: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ris_snr_db: Option<f64>,
    pub delay_mode: DelayMode,
    pub gain_policy: GainPolicy,
    pub per_antenna_noise: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            ap: Point::new(100.0, 0.0),
            ris: Point::new(0.0, 600.0),
            pr: Point::new(200.0, 1000.0),
            cell: [1000.0, 1000.0],
            ris_boresight_deg: 0.0,
            pr_boresight_deg: None,
            pr_antennas: 16,
            zc_length: 1989,
            zc_root: 7,
            sample_rate_hz: SPEED_OF_LIGHT / 0.5,
            epochs_initial: EpochCounts::default().initial,
            epochs_directed: EpochCounts::default().directed,
            ap_los: false,
            target_los: false,
            noiseless: false,
            ris_snr_db: None,
            delay_mode: DelayMode::Integer,
            gain_policy: GainPolicy::UnitRandomPhase,
            per_antenna_noise: false,
        }
    }
}

impl ScenarioConfig {
    pub fn layout(&self) -> Result<NodeLayout> {
        let layout = NodeLayout {
            ap: self.ap,
            ris: self.ris,
            pr: self.pr,
            cell_width: self.cell[0],
            cell_height: self.cell[1],
            ris_boresight_deg: self.ris_boresight_deg,
            pr_boresight_deg: self
                .pr_boresight_deg
                .unwrap_or_else(|| bearing_deg(self.pr, self.ris)),
        };
        layout.validate()?;
        Ok(layout)
    }

    /// Scenario for one grid point.
    pub fn build(&self, snr_db: f64, ris_elements: usize, targets: Vec<Point>) -> Result<Scenario> {
        let k = targets.len();
        Ok(Scenario {
            layout: self.layout()?,
            targets,
            ris_elements,
            pr_antennas: self.pr_antennas,
            epochs: EpochCounts {
                initial: self.epochs_initial,
                directed: self.epochs_directed,
            },
            ap_los: self.ap_los,
            target_los: vec![self.target_los; k],
            snr_db: (!self.noiseless).then_some(snr_db),
            ris_snr_db: self.ris_snr_db,
            sample_rate_hz: self.sample_rate_hz,
            zc_length: self.zc_length,
            zc_root: self.zc_root,
            delay_mode: self.delay_mode,
            gain_policy: self.gain_policy,
            per_antenna_noise: self.per_antenna_noise,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    pub srp_epsilon_m: f64,
    /// Count an SRP success only when `K_hat = K` as well.
    pub srp_strict: bool,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            srp_epsilon_m: 1.0,
            srp_strict: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub master_seed: u64,
    /// Monte-Carlo trials P per grid point.
    pub trials: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Worker threads; unset uses every core.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Fill the runtime column. Wall-clock times differ between runs, so
    /// byte-identical output needs this off.
    pub record_timing: bool,
    pub axes: Axes,
    pub scenario: ScenarioConfig,
    pub scene: SceneConstraints,
    pub estimator: EstimatorParams,
    pub metrics: MetricsConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            master_seed: 1,
            trials: 200,
            output: None,
            threads: None,
            record_timing: true,
            axes: Axes::default(),
            scenario: ScenarioConfig::default(),
            scene: SceneConstraints::default(),
            estimator: EstimatorParams::default(),
            metrics: MetricsConfig::default(),
        }
    }
}

fn check(ok: bool, field: &str, message: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(field, message))
    }
}

impl SweepConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config("<document>", e.to_string()))?;
        Self::from_table(table)
    }

    pub fn from_table(table: toml::Table) -> Result<Self> {
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::config("<document>", e.to_string().trim().to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("<document>", e.to_string()))
    }

    /// Reads a config file and applies `key=value` overrides before parsing.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config("<document>", e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        Self::from_table(table)
    }

    pub fn grid_points(&self) -> usize {
        self.axes.snr_db.len() * self.axes.ris_elements.len() * self.axes.targets.len()
    }

    pub fn validate(&self) -> Result<()> {
        check(self.trials >= 1, "trials", "must be at least 1")?;
        check(!self.axes.snr_db.is_empty(), "axes.snr_db", "must not be empty")?;
        check(!self.axes.ris_elements.is_empty(), "axes.ris_elements", "must not be empty")?;
        check(!self.axes.targets.is_empty(), "axes.targets", "must not be empty")?;
        check(
            self.axes.snr_db.iter().all(|s| s.is_finite()),
            "axes.snr_db",
            "values must be finite",
        )?;
        check(
            self.axes.ris_elements.iter().all(|&m| m >= 2),
            "axes.ris_elements",
            "values must be at least 2",
        )?;
        check(self.threads != Some(0), "threads", "must be at least 1 when set")?;

        let s = &self.scenario;
        check(s.pr_antennas >= 1, "scenario.pr_antennas", "must be at least 1")?;
        check(s.epochs_initial >= 1, "scenario.epochs_initial", "must be at least 1")?;
        check(s.epochs_directed >= 1, "scenario.epochs_directed", "must be at least 1")?;
        check(
            s.sample_rate_hz.is_finite() && s.sample_rate_hz > 0.0,
            "scenario.sample_rate_hz",
            "must be positive",
        )?;
        crate::signal::generate_zc(s.zc_length, s.zc_root)
            .map_err(|e| Error::config("scenario.zc_root", e.to_string()))?;
        s.layout()
            .map_err(|e| Error::config("scenario", e.to_string()))?;
        for &snr in &self.axes.snr_db {
            for &m in &self.axes.ris_elements {
                s.build(snr, m, Vec::new())
                    .and_then(|sc| sc.validate())
                    .map_err(|e| Error::config("scenario", e.to_string()))?;
            }
        }

        self.scene.validate()?;
        self.estimator
            .validate()
            .map_err(|e| Error::config("estimator", e.to_string()))?;
        check(
            self.metrics.srp_epsilon_m.is_finite() && self.metrics.srp_epsilon_m >= 0.0,
            "metrics.srp_epsilon_m",
            "must be non-negative",
        )?;
        Ok(())
    }
}

/// Sets `dotted.key = value` in a TOML table. The value is parsed as TOML
/// and taken as a bare string when that fails.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::config(assignment, "override must look like key=value"))?;
    let key = key.trim();
    let raw = raw.trim();
    if key.is_empty() {
        return Err(Error::config(assignment, "empty override key"));
    }
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    let mut cur = table;
    for part in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::config(key, format!("`{part}` is not a table")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
