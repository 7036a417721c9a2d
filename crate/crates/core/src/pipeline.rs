//! One localization trial: probe, scan angles, range each direction, map.

use std::sync::Arc;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::channel::{
    steering_vector, synthesize_ris_signal, PathGains, PathGeometry, PrChannel, Scenario,
    SnapshotMatrix, SnapshotRole,
};
use crate::estimation::{
    associate_exclusive, average_epochs, count_targets, estimate_toas, AoaParams, DelayGate,
    ProbeAnalysis, ToaEstimate, ToaParams,
};
use crate::geometry::{map_to_position, Point, SensingPair};
use crate::ris_control::{directed_reflection_matrix, initial_reflection_matrix, pr_beamformer};
use crate::rng::{stream, Stream};
use crate::signal::{generate_zc, Correlator, ZcSequence};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorParams {
    pub aoa: AoaParams,
    pub g_tau: f64,
    /// Lags around the relay delay that never count as targets.
    pub guard_samples: usize,
    /// ToA peaks closer than this are merged; also the association tolerance.
    pub min_lag_separation: usize,
    /// Re-estimate each pair's angle from the probing data at its own lag.
    pub refine_pair_angles: bool,
    /// Keep each detected delay only in its strongest direction.
    pub exclusive_association: bool,
    /// Upper bound on directed phases; the strongest directions are kept.
    pub max_directions: usize,
    /// Also gate the known direct AP -> PR delay.
    pub reject_direct_path: bool,
    /// After the directed phases, steer extra phases toward strong probing
    /// lags that no direction explained. This catches targets whose angle
    /// hides in the shoulder of a stronger peak of the angle spectrum.
    pub residual_pass: bool,
    /// A residual lag must carry this many times the median probing lag
    /// energy, which keeps pure-noise lags out.
    pub residual_floor: f64,
}

impl Default for EstimatorParams {
    fn default() -> Self {
        Self {
            aoa: AoaParams::default(),
            g_tau: 0.3,
            guard_samples: 2,
            min_lag_separation: 2,
            refine_pair_angles: true,
            exclusive_association: true,
            max_directions: 32,
            reject_direct_path: true,
            residual_pass: true,
            residual_floor: 4.0,
        }
    }
}

impl EstimatorParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.g_tau > 0.0 && self.g_tau < 1.0) {
            return Err(Error::invalid("g_tau must lie in (0, 1)"));
        }
        if !(self.aoa.g_theta > 0.0 && self.aoa.g_theta < 1.0) {
            return Err(Error::invalid("g_theta must lie in (0, 1)"));
        }
        if !(self.residual_floor >= 0.0) {
            return Err(Error::invalid("residual_floor must be non-negative"));
        }
        if self.max_directions == 0 {
            return Err(Error::invalid("max_directions must be at least one"));
        }
        crate::estimation::scan_grid(self.aoa.grid_step_deg, self.aoa.grid_limit_deg)?;
        Ok(())
    }
}

/// A detected pair that could not be placed on the map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingFailure {
    pub pair: SensingPair,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub seed: u64,
    pub true_positions: Vec<Point>,
    /// One entry per successfully mapped pair.
    pub estimated_positions: Vec<Point>,
    /// Detected sensing pairs, mapped ones first in the same order as
    /// `estimated_positions`.
    pub sensing_pairs: Vec<SensingPair>,
    pub k: usize,
    /// Detected target count, including pairs that failed to map.
    pub k_hat: usize,
    pub mapping_failures: Vec<MappingFailure>,
    /// Steering angles of the directed phases, in phase order.
    pub directions_deg: Vec<f64>,
    /// Number of RIS phases run, probing included.
    pub phases: usize,
}

impl TrialOutcome {
    /// Outcome carrying positions only; used by metric tests and tools.
    pub fn from_positions(true_positions: Vec<Point>, estimated_positions: Vec<Point>) -> Self {
        Self {
            seed: 0,
            k: true_positions.len(),
            k_hat: estimated_positions.len(),
            true_positions,
            estimated_positions,
            sensing_pairs: Vec::new(),
            mapping_failures: Vec::new(),
            directions_deg: Vec::new(),
            phases: 0,
        }
    }
}

/// Seeds of one trial. The gain seed is split out so a sweep can hold the
/// propagation draws fixed across grid points that only change the SNR or
/// the RIS size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialSeeds {
    /// Drives RIS probing and noise; reported in the outcome.
    pub trial: u64,
    pub gains: u64,
}

impl TrialSeeds {
    pub fn single(seed: u64) -> Self {
        Self {
            trial: seed,
            gains: seed,
        }
    }
}

/// Preamble and correlator shared across trials with the same sequence.
#[derive(Debug, Clone)]
pub struct TrialContext {
    pub zc: Arc<ZcSequence>,
    pub correlator: Arc<Correlator>,
}

impl TrialContext {
    pub fn new(zc_length: usize, zc_root: usize) -> Result<Self> {
        let zc = generate_zc(zc_length, zc_root)?;
        let correlator = Correlator::for_zc(&zc);
        Ok(Self {
            zc: Arc::new(zc),
            correlator: Arc::new(correlator),
        })
    }

    pub fn matches(&self, scenario: &Scenario) -> bool {
        self.zc.len() == scenario.zc_length && self.zc.root() == scenario.zc_root
    }

    pub fn run_trial(&self, scenario: &Scenario, params: &EstimatorParams, seed: u64) -> Result<TrialOutcome> {
        self.run_trial_seeded(scenario, params, TrialSeeds::single(seed))
    }

    pub fn run_trial_seeded(&self, scenario: &Scenario, params: &EstimatorParams, seeds: TrialSeeds) -> Result<TrialOutcome> {
        let seed = seeds.trial;
        if !self.matches(scenario) {
            return Err(Error::invalid("trial context built for a different preamble"));
        }
        scenario.validate()?;
        params.validate()?;
        let m = scenario.ris_elements;
        if m < 2 {
            return Err(Error::invalid("at least two RIS elements are required"));
        }
        let zc = &*self.zc;
        let l = zc.len();
        let f = scenario.sample_rate_hz;
        let geo = PathGeometry::new(&scenario.layout, &scenario.targets);

        let mut gains_rng = stream(seeds.gains, Stream::Gains);
        let mut probe_rng = stream(seed, Stream::Probing);
        let mut noise_rng = stream(seed, Stream::Noise);

        let gains = PathGains::draw(scenario.gain_policy, scenario, &mut gains_rng);
        let ris = synthesize_ris_signal(scenario, zc, &gains)?;
        let w = pr_beamformer(geo.theta_ris_pr, scenario.pr_antennas)?;
        let pr = PrChannel::new(scenario, zc, &gains)?.combined(&w.w, scenario.per_antenna_noise)?;
        let departure = steering_vector(m, geo.phi_ris_pr)?;
        let ris_var = scenario.ris_noise_variance();

        let mut gate = DelayGate::new(geo.relay_delay(), params.guard_samples);
        if params.reject_direct_path {
            gate.direct_delay_s = Some(geo.tau_ap_pr);
        }

        // probing phase
        let v0 = initial_reflection_matrix(geo.theta_ap_ris, geo.phi_ris_pr, m, scenario.epochs.initial, &mut probe_rng)?;
        let mut z0 = Array2::zeros((scenario.epochs.initial, l));
        for n in 0..v0.epochs() {
            let v = v0.column(n).to_vec();
            let x = ris.reflect_noisy(&v, &departure, l, ris_var, &mut noise_rng);
            let z = pr.receive(&x, &mut noise_rng);
            z0.row_mut(n).assign(&ndarray::ArrayView1::from(&z[..]));
        }
        let z0 = SnapshotMatrix {
            data: z0,
            role: SnapshotRole::Beamformed,
        };
        let probe = ProbeAnalysis::new(&z0, &v0, geo.phi_ris_pr, &self.correlator, &gate, f)?;
        let aoa = probe.estimate(&params.aoa)?;
        let mut directions: Vec<f64> = aoa.angles_deg.clone();
        if directions.len() > params.max_directions {
            let value = |a: f64| probe.power(a);
            directions.sort_by(|&a, &b| value(b).total_cmp(&value(a)).then(a.total_cmp(&b)));
            directions.truncate(params.max_directions);
            directions.sort_by(f64::total_cmp);
        }

        // one directed phase per angle
        let toa_params = ToaParams {
            g_tau: params.g_tau,
            min_separation_lags: params.min_lag_separation,
            sample_rate_hz: f,
            gate,
        };
        let mut directed_phase = |q: usize, theta: f64| -> Result<ToaEstimate> {
            let vq = directed_reflection_matrix(theta, geo.phi_ris_pr, m, scenario.epochs.directed, q + 1)?;
            let v = vq.column(0).to_vec();
            let mut zq = Array2::zeros((vq.epochs(), l));
            for n in 0..vq.epochs() {
                let x = ris.reflect_noisy(&v, &departure, l, ris_var, &mut noise_rng);
                let z = pr.receive(&x, &mut noise_rng);
                zq.row_mut(n).assign(&ndarray::ArrayView1::from(&z[..]));
            }
            let zq = SnapshotMatrix {
                data: zq,
                role: SnapshotRole::Beamformed,
            };
            let avg = average_epochs(&zq)?;
            estimate_toas(&avg, &self.correlator, &toa_params, q)
        };
        let mut toas: Vec<ToaEstimate> = Vec::with_capacity(directions.len());
        for (q, &theta) in directions.iter().enumerate() {
            toas.push(directed_phase(q, theta)?);
        }

        if params.residual_pass && directions.len() < params.max_directions {
            let explained: Vec<usize> = toas.iter().flat_map(|t| t.lags.iter().copied()).collect();
            let residual = probe.residual_lags(&explained, params.g_tau, params.residual_floor, params.min_lag_separation);
            if !residual.is_empty() {
                let mut extra: Vec<f64> = probe
                    .rescan(&residual, &params.aoa)?
                    .into_iter()
                    .filter(|t| directions.iter().all(|d| (d - t).abs() >= params.aoa.min_separation_deg))
                    .collect();
                extra.truncate(params.max_directions - directions.len());
                for theta in extra {
                    toas.push(directed_phase(directions.len(), theta)?);
                    directions.push(theta);
                }
            }
        }

        if params.exclusive_association {
            associate_exclusive(&mut toas, params.min_lag_separation, l);
        }
        let k_hat = count_targets(&toas);

        // pair and map
        let half_width = 2.0 / m as f64;
        let mut mapped = Vec::new();
        let mut failures = Vec::new();
        for t in &toas {
            let theta_q = directions[t.direction_index];
            for (i, &tau) in t.delays_s.iter().enumerate() {
                let theta = if params.refine_pair_angles {
                    probe.refine_for_lag(t.lags[i], theta_q, half_width, params.aoa.grid_limit_deg)
                } else {
                    theta_q
                };
                let pair = SensingPair {
                    theta_ris_deg: theta,
                    tau_s: tau,
                };
                match map_to_position(pair, &scenario.layout) {
                    Ok(p) => mapped.push((pair, p)),
                    Err(e) => failures.push(MappingFailure {
                        pair,
                        reason: e.to_string(),
                    }),
                }
            }
        }

        let mut sensing_pairs: Vec<SensingPair> = mapped.iter().map(|(s, _)| *s).collect();
        sensing_pairs.extend(failures.iter().map(|f| f.pair));
        Ok(TrialOutcome {
            seed,
            true_positions: scenario.targets.clone(),
            estimated_positions: mapped.into_iter().map(|(_, p)| p).collect(),
            sensing_pairs,
            k: scenario.targets.len(),
            k_hat,
            mapping_failures: failures,
            directions_deg: directions.clone(),
            phases: 1 + directions.len(),
        })
    }
}

/// Runs a single trial, building the preamble context on the fly.
pub fn run_trial(scenario: &Scenario, params: &EstimatorParams, seed: u64) -> Result<TrialOutcome> {
    TrialContext::new(scenario.zc_length, scenario.zc_root)?.run_trial(scenario, params, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{DelayMode, EpochCounts, GainPolicy};
    use crate::geometry::{distance, NodeLayout, SPEED_OF_LIGHT};

    fn scenario(targets: Vec<Point>, m: usize) -> Scenario {
        let layout = NodeLayout::new(
            Point::new(100.0, 0.0),
            Point::new(0.0, 600.0),
            Point::new(200.0, 1000.0),
            1000.0,
            1000.0,
        )
        .unwrap();
        let k = targets.len();
        Scenario {
            layout,
            targets,
            ris_elements: m,
            pr_antennas: 16,
            epochs: EpochCounts::default(),
            ap_los: false,
            target_los: vec![false; k],
            snr_db: None,
            ris_snr_db: None,
            sample_rate_hz: SPEED_OF_LIGHT / 0.5,
            zc_length: 1989,
            zc_root: 7,
            delay_mode: DelayMode::Integer,
            gain_policy: GainPolicy::UnitRandomPhase,
            per_antenna_noise: false,
        }
    }

    #[test]
    fn noiseless_two_targets_are_localized() {
        let targets = vec![Point::new(400.0, 750.0), Point::new(500.0, 300.0)];
        let out = run_trial(&scenario(targets.clone(), 64), &EstimatorParams::default(), 1).unwrap();
        assert_eq!(out.k_hat, 2, "{out:?}");
        assert_eq!(out.estimated_positions.len(), 2);
        for t in &targets {
            let best = out
                .estimated_positions
                .iter()
                .map(|e| distance(*e, *t))
                .fold(f64::INFINITY, f64::min);
            assert!(best < 0.5, "{best}");
        }
    }

    #[test]
    fn empty_scene_detects_nothing() {
        let out = run_trial(&scenario(vec![], 32), &EstimatorParams::default(), 4).unwrap();
        assert_eq!(out.k, 0);
        assert_eq!(out.k_hat, 0);
        assert!(out.estimated_positions.is_empty());
    }

    #[test]
    fn same_seed_same_outcome() {
        let mut sc = scenario(vec![Point::new(400.0, 750.0)], 16);
        sc.snr_db = Some(-10.0);
        let p = EstimatorParams::default();
        let a = run_trial(&sc, &p, 77).unwrap();
        let b = run_trial(&sc, &p, 77).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.estimated_positions.len() + a.mapping_failures.len(), a.k_hat);
    }

    #[test]
    fn mismatched_context_is_rejected() {
        let ctx = TrialContext::new(63, 5).unwrap();
        let sc = scenario(vec![], 16);
        assert!(ctx.run_trial(&sc, &EstimatorParams::default(), 0).is_err());
    }

    #[test]
    fn bad_thresholds_are_rejected() {
        let sc = scenario(vec![], 16);
        let mut p = EstimatorParams::default();
        p.g_tau = 1.5;
        assert!(run_trial(&sc, &p, 0).is_err());
    }
}
