//! Received-signal synthesis at the RIS and at the passive radar.
//!
//! Both arrays are half-wavelength uniform linear arrays. Every path carries a
//! cyclically delayed copy of the preamble, which models the steady state of a
//! preamble that the AP transmits back to back.
//!
//! In [`DelayMode::Integer`] each path's end-to-end delay at the PR is rounded
//! once to the sample grid. The RIS-side shift of a path is therefore chosen
//! as `round(total) - round(tau_ris_pr)`, so that the PR-side shift of the
//! reflected signal completes the rounded total.

use std::f64::consts::PI;

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::geometry::{distance, NodeLayout, Point, SPEED_OF_LIGHT};
use crate::signal::{cyclic_delay, ZcSequence};
use crate::{Error, Result, C64};

/// ULA response `exp(j*pi*i*sin_theta)` without range checks.
pub(crate) fn ula_response(num_elements: usize, sin_theta: f64) -> Vec<C64> {
    let step = C64::from_polar(1.0, PI * sin_theta);
    let mut out = Vec::with_capacity(num_elements);
    let mut acc = C64::new(1.0, 0.0);
    for i in 0..num_elements {
        // re-anchor periodically so the recurrence does not drift
        if i % 64 == 0 {
            acc = C64::from_polar(1.0, PI * i as f64 * sin_theta);
        }
        out.push(acc);
        acc *= step;
    }
    out
}

/// Half-wavelength ULA steering vector toward `theta_deg`, element `i` equal
/// to `exp(j*pi*i*sin(theta))`.
pub fn steering_vector(num_elements: usize, theta_deg: f64) -> Result<Vec<C64>> {
    if num_elements == 0 {
        return Err(Error::invalid("steering vector needs at least one element"));
    }
    if !(theta_deg.is_finite() && theta_deg.abs() < 90.0) {
        return Err(Error::invalid(format!(
            "steering angle {theta_deg} deg outside (-90, 90)"
        )));
    }
    Ok(ula_response(num_elements, theta_deg.to_radians().sin()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DelayMode {
    /// Cyclic shift by a whole number of samples.
    #[default]
    Integer,
    /// Band-limited cyclic delay through a frequency-domain phase ramp.
    Fractional,
}

/// Delays a cyclic signal by `tau_s`.
pub fn delay_signal(s: &[C64], tau_s: f64, sample_rate_hz: f64, mode: DelayMode) -> Result<Vec<C64>> {
    if !(tau_s.is_finite() && tau_s >= 0.0) {
        return Err(Error::invalid(format!("delay {tau_s} s must be non-negative")));
    }
    if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
        return Err(Error::invalid("sample rate must be positive"));
    }
    Ok(delay_by_samples(s, tau_s * sample_rate_hz, mode))
}

pub(crate) fn delay_by_samples(s: &[C64], samples: f64, mode: DelayMode) -> Vec<C64> {
    let l = s.len();
    if l == 0 {
        return Vec::new();
    }
    match mode {
        DelayMode::Integer => {
            let shift = samples.round().rem_euclid(l as f64) as usize;
            cyclic_delay(s, shift)
        }
        DelayMode::Fractional => {
            let mut planner = FftPlanner::new();
            let fwd = planner.plan_fft_forward(l);
            let inv = planner.plan_fft_inverse(l);
            let mut buf = s.to_vec();
            fwd.process(&mut buf);
            for (k, v) in buf.iter_mut().enumerate() {
                // signed frequency index; the Nyquist bin of even lengths is
                // left real so that real inputs stay real
                let kk = k as f64;
                let signed = if 2 * k < l {
                    kk
                } else if 2 * k == l {
                    0.0
                } else {
                    kk - l as f64
                };
                *v *= C64::from_polar(1.0, -2.0 * PI * signed * samples / l as f64);
            }
            inv.process(&mut buf);
            let scale = 1.0 / l as f64;
            buf.iter_mut().for_each(|v| *v *= scale);
            buf
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GainPolicy {
    /// Unit magnitude, independent uniform phase per path and trial.
    UnitRandomPhase,
    /// Free-space amplitude `lambda / (4 pi d)` per hop, random phase.
    FreeSpace { carrier_hz: f64 },
}

impl Default for GainPolicy {
    fn default() -> Self {
        GainPolicy::UnitRandomPhase
    }
}

/// Complex path gains for one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct PathGains {
    /// AP -> RIS.
    pub alpha_0: C64,
    /// AP -> target k -> RIS.
    pub alpha: Vec<C64>,
    /// RIS -> PR.
    pub rho_ris_pr: C64,
    /// AP -> PR line of sight.
    pub rho_ap_pr: C64,
    /// AP -> target k -> PR.
    pub rho: Vec<C64>,
}

impl PathGains {
    /// All gains equal to one; handy for deterministic checks.
    pub fn unit(num_targets: usize) -> Self {
        let one = C64::new(1.0, 0.0);
        Self {
            alpha_0: one,
            alpha: vec![one; num_targets],
            rho_ris_pr: one,
            rho_ap_pr: one,
            rho: vec![one; num_targets],
        }
    }

    pub fn draw<R: Rng + ?Sized>(policy: GainPolicy, scenario: &Scenario, rng: &mut R) -> Self {
        let mut phase = || C64::from_polar(1.0, rng.random_range(0.0..2.0 * PI));
        let l = &scenario.layout;
        let hop = |a: Point, b: Point| match policy {
            GainPolicy::UnitRandomPhase => 1.0,
            GainPolicy::FreeSpace { carrier_hz } => {
                let lambda = SPEED_OF_LIGHT / carrier_hz;
                lambda / (4.0 * PI * distance(a, b))
            }
        };
        let alpha_0 = phase() * hop(l.ap, l.ris);
        let rho_ris_pr = phase() * hop(l.ris, l.pr);
        let rho_ap_pr = phase() * hop(l.ap, l.pr);
        let mut alpha = Vec::with_capacity(scenario.targets.len());
        let mut rho = Vec::with_capacity(scenario.targets.len());
        for &t in &scenario.targets {
            alpha.push(phase() * hop(l.ap, t) * hop(t, l.ris));
            rho.push(phase() * hop(l.ap, t) * hop(t, l.pr));
        }
        Self {
            alpha_0,
            alpha,
            rho_ris_pr,
            rho_ap_pr,
            rho,
        }
    }

    pub fn scaled(&self, k: C64) -> Self {
        Self {
            alpha_0: self.alpha_0 * k,
            alpha: self.alpha.iter().map(|a| a * k).collect(),
            rho_ris_pr: self.rho_ris_pr,
            rho_ap_pr: self.rho_ap_pr * k,
            rho: self.rho.iter().map(|a| a * k).collect(),
        }
    }
}

/// Epoch counts for the AoA phase and for each per-direction ToA phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpochCounts {
    pub initial: usize,
    pub directed: usize,
}

impl Default for EpochCounts {
    fn default() -> Self {
        Self {
            initial: 64,
            directed: 16,
        }
    }
}

/// Everything needed to synthesize one trial's received signals.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub layout: NodeLayout,
    pub targets: Vec<Point>,
    /// RIS element count M.
    pub ris_elements: usize,
    /// PR antenna count.
    pub pr_antennas: usize,
    pub epochs: EpochCounts,
    /// B_AP: true when the AP -> PR line of sight exists.
    pub ap_los: bool,
    /// B_k per target: true when the target -> PR line of sight exists.
    pub target_los: Vec<bool>,
    /// Unit signal power over per-sample noise variance at each PR antenna;
    /// `None` disables receiver noise.
    pub snr_db: Option<f64>,
    /// Optional AWGN at each RIS element, same convention.
    pub ris_snr_db: Option<f64>,
    pub sample_rate_hz: f64,
    pub zc_length: usize,
    pub zc_root: usize,
    pub delay_mode: DelayMode,
    pub gain_policy: GainPolicy,
    /// Draw noise on every PR antenna before combining instead of after.
    pub per_antenna_noise: bool,
}

impl Scenario {
    pub fn num_targets(&self) -> usize {
        self.targets.len()
    }

    pub fn noise_variance(&self) -> f64 {
        self.snr_db.map_or(0.0, |s| 10f64.powf(-s / 10.0))
    }

    pub fn ris_noise_variance(&self) -> f64 {
        self.ris_snr_db.map_or(0.0, |s| 10f64.powf(-s / 10.0))
    }

    pub fn validate(&self) -> Result<()> {
        self.layout.validate()?;
        if self.ris_elements == 0 || self.pr_antennas == 0 {
            return Err(Error::invalid("array sizes must be at least one"));
        }
        if self.epochs.initial == 0 || self.epochs.directed == 0 {
            return Err(Error::invalid("epoch counts must be at least one"));
        }
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(Error::invalid("sample rate must be positive"));
        }
        if self.target_los.len() != self.targets.len() {
            return Err(Error::invalid(format!(
                "{} blockage flags for {} targets",
                self.target_los.len(),
                self.targets.len()
            )));
        }
        if let Some(s) = self.snr_db {
            if !s.is_finite() {
                return Err(Error::invalid("snr_db must be finite"));
            }
        }
        if let GainPolicy::FreeSpace { carrier_hz } = self.gain_policy {
            if !(carrier_hz.is_finite() && carrier_hz > 0.0) {
                return Err(Error::invalid("carrier frequency must be positive"));
            }
        }
        let l = &self.layout;
        for (name, p) in [("ap", l.ap), ("pr", l.pr)] {
            if l.angle_at_ris(p).abs() >= 90.0 {
                return Err(Error::invalid(format!("{name} is behind the RIS")));
            }
        }
        if l.angle_at_pr(l.ris).abs() >= 90.0 {
            return Err(Error::invalid("RIS is behind the PR array"));
        }
        for (k, &t) in self.targets.iter().enumerate() {
            if !l.contains(t) {
                return Err(Error::invalid(format!("target {k} lies outside the cell")));
            }
            crate::geometry::forward_sensing(t, l)?;
        }
        Ok(())
    }
}

/// Angles and delays derived from a scenario's layout.
#[derive(Debug, Clone, PartialEq)]
pub struct PathGeometry {
    /// AoA of the AP at the RIS.
    pub theta_ap_ris: f64,
    /// AoD from the RIS toward the PR.
    pub phi_ris_pr: f64,
    /// AoA of the RIS at the PR.
    pub theta_ris_pr: f64,
    pub theta_ap_pr: f64,
    pub theta_targets_ris: Vec<f64>,
    pub theta_targets_pr: Vec<f64>,
    pub tau_ap_ris: f64,
    pub tau_ris_pr: f64,
    pub tau_ap_pr: f64,
    /// AP -> target k -> RIS.
    pub tau_targets_ris: Vec<f64>,
    /// AP -> target k -> PR.
    pub tau_targets_pr: Vec<f64>,
}

impl PathGeometry {
    pub fn new(layout: &NodeLayout, targets: &[Point]) -> Self {
        let c = SPEED_OF_LIGHT;
        Self {
            theta_ap_ris: layout.angle_at_ris(layout.ap),
            phi_ris_pr: layout.angle_at_ris(layout.pr),
            theta_ris_pr: layout.angle_at_pr(layout.ris),
            theta_ap_pr: layout.angle_at_pr(layout.ap),
            theta_targets_ris: targets.iter().map(|&t| layout.angle_at_ris(t)).collect(),
            theta_targets_pr: targets.iter().map(|&t| layout.angle_at_pr(t)).collect(),
            tau_ap_ris: layout.ap_ris_distance() / c,
            tau_ris_pr: layout.ris_pr_distance() / c,
            tau_ap_pr: distance(layout.ap, layout.pr) / c,
            tau_targets_ris: targets
                .iter()
                .map(|&t| (distance(layout.ap, t) + distance(t, layout.ris)) / c)
                .collect(),
            tau_targets_pr: targets
                .iter()
                .map(|&t| (distance(layout.ap, t) + distance(t, layout.pr)) / c)
                .collect(),
        }
    }

    /// Total AP -> RIS -> PR relay delay.
    pub fn relay_delay(&self) -> f64 {
        self.tau_ap_ris + self.tau_ris_pr
    }

    /// Total delay of target `k` through the RIS.
    pub fn target_delay(&self, k: usize) -> f64 {
        self.tau_targets_ris[k] + self.tau_ris_pr
    }
}

/// One plane wave impinging on the RIS.
#[derive(Debug, Clone, PartialEq)]
pub struct RisPath {
    pub theta_deg: f64,
    /// Array response `a_M(theta)`.
    pub response: Vec<C64>,
    /// Gain-scaled, delayed preamble.
    pub waveform: Vec<C64>,
}

/// Received signal at the RIS, kept in factored form `sum_p a_M(theta_p) w_p^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct RisSignal {
    pub num_elements: usize,
    pub paths: Vec<RisPath>,
}

impl RisSignal {
    /// Builds the signal from `(theta, gain, delay in samples)` triples.
    pub fn from_paths(
        num_elements: usize,
        zc: &ZcSequence,
        paths: &[(f64, C64, f64)],
        mode: DelayMode,
    ) -> Result<Self> {
        let paths = paths
            .iter()
            .map(|&(theta, gain, delay)| {
                let response = steering_vector(num_elements, theta)?;
                let waveform = delay_by_samples(zc.samples(), delay, mode)
                    .into_iter()
                    .map(|v| v * gain)
                    .collect();
                Ok(RisPath {
                    theta_deg: theta,
                    response,
                    waveform,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            num_elements,
            paths,
        })
    }

    pub fn len(&self) -> usize {
        self.paths.first().map_or(0, |p| p.waveform.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Dense `M x L` matrix.
    pub fn to_matrix(&self, samples: usize) -> Array2<C64> {
        let mut r = Array2::zeros((self.num_elements, samples));
        for p in &self.paths {
            for (i, a) in p.response.iter().enumerate() {
                for (t, w) in p.waveform.iter().enumerate() {
                    r[[i, t]] += a * w;
                }
            }
        }
        r
    }

    /// `a_M(phi)^T diag(v) r` evaluated path by path.
    pub fn reflect(&self, v: &[C64], departure: &[C64], samples: usize) -> Vec<C64> {
        let mut x = vec![C64::new(0.0, 0.0); samples];
        for p in &self.paths {
            let g: C64 = v
                .iter()
                .zip(departure)
                .zip(&p.response)
                .map(|((vi, di), ai)| vi * di * ai)
                .sum();
            for (xt, w) in x.iter_mut().zip(&p.waveform) {
                *xt += g * w;
            }
        }
        x
    }

    /// As [`RisSignal::reflect`] plus independent AWGN of variance `noise_var`
    /// on every element.
    pub fn reflect_noisy<R: Rng + ?Sized>(
        &self,
        v: &[C64],
        departure: &[C64],
        samples: usize,
        noise_var: f64,
        rng: &mut R,
    ) -> Vec<C64> {
        let mut x = self.reflect(v, departure, samples);
        if noise_var > 0.0 {
            let sd = (noise_var / 2.0).sqrt();
            let weights: Vec<C64> = v.iter().zip(departure).map(|(a, b)| a * b).collect();
            for xt in x.iter_mut() {
                for w in &weights {
                    *xt += w * complex_normal(rng, sd);
                }
            }
        }
        x
    }
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R, sd: f64) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * sd, im * sd)
}

/// Received signal at the RIS: target echoes plus the direct AP path.
pub fn synthesize_ris_signal(scenario: &Scenario, zc: &ZcSequence, gains: &PathGains) -> Result<RisSignal> {
    let geo = PathGeometry::new(&scenario.layout, &scenario.targets);
    let f = scenario.sample_rate_hz;
    let mode = scenario.delay_mode;
    let ris_shift = |tau_ris: f64| match mode {
        DelayMode::Integer => ((tau_ris + geo.tau_ris_pr) * f).round() - (geo.tau_ris_pr * f).round(),
        DelayMode::Fractional => tau_ris * f,
    };
    let mut paths = Vec::with_capacity(scenario.targets.len() + 1);
    for k in 0..scenario.targets.len() {
        paths.push((
            geo.theta_targets_ris[k],
            gains.alpha[k],
            ris_shift(geo.tau_targets_ris[k]),
        ));
    }
    paths.push((geo.theta_ap_ris, gains.alpha_0, ris_shift(geo.tau_ap_ris)));
    RisSignal::from_paths(scenario.ris_elements, zc, &paths, mode)
}

/// Dense form of the RIS reflection for one epoch.
pub fn apply_ris_reflection(r: ArrayView2<'_, C64>, v: &[C64], phi_ris_pr_deg: f64) -> Result<Vec<C64>> {
    let (m, l) = r.dim();
    if v.len() != m {
        return Err(Error::invalid(format!(
            "reflection vector has {} entries for {m} elements",
            v.len()
        )));
    }
    if let Some(bad) = v.iter().find(|vi| (vi.norm() - 1.0).abs() > 1e-9) {
        return Err(Error::invalid(format!(
            "reflection coefficient {bad} is not unit modulus"
        )));
    }
    let departure = steering_vector(m, phi_ris_pr_deg)?;
    let mut x = vec![C64::new(0.0, 0.0); l];
    for i in 0..m {
        let w = departure[i] * v[i];
        for (xt, rt) in x.iter_mut().zip(r.row(i)) {
            *xt += w * rt;
        }
    }
    Ok(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotRole {
    /// Raw PR samples `Y_{n,q}`, antennas x samples.
    PrRaw,
    /// Beamformed rows `Z(V_q)`, epochs x samples.
    Beamformed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotMatrix {
    pub data: Array2<C64>,
    pub role: SnapshotRole,
}

impl SnapshotMatrix {
    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn samples(&self) -> usize {
        self.data.ncols()
    }
}

/// Static part of the PR-side channel for one trial.
#[derive(Debug, Clone)]
pub struct PrChannel {
    antennas: usize,
    samples: usize,
    /// `rho_ris_pr * a(theta_ris_pr)`.
    relay_response: Vec<C64>,
    relay_shift: f64,
    mode: DelayMode,
    /// Direct AP and target paths, already delayed, `N_PR x L`; `None` when all
    /// lines of sight are blocked.
    direct: Option<Array2<C64>>,
    noise_sd: f64,
}

impl PrChannel {
    pub fn new(scenario: &Scenario, zc: &ZcSequence, gains: &PathGains) -> Result<Self> {
        let geo = PathGeometry::new(&scenario.layout, &scenario.targets);
        let n = scenario.pr_antennas;
        let l = zc.len();
        let f = scenario.sample_rate_hz;
        let mode = scenario.delay_mode;
        let at_pr = |theta_deg: f64| ula_response(n, theta_deg.to_radians().sin());

        let relay_response = steering_vector(n, geo.theta_ris_pr)?
            .into_iter()
            .map(|a| a * gains.rho_ris_pr)
            .collect();

        let mut direct_paths: Vec<(Vec<C64>, C64, f64)> = Vec::new();
        if scenario.ap_los {
            direct_paths.push((at_pr(geo.theta_ap_pr), gains.rho_ap_pr, geo.tau_ap_pr * f));
        }
        for k in 0..scenario.targets.len() {
            if scenario.target_los[k] {
                direct_paths.push((
                    at_pr(geo.theta_targets_pr[k]),
                    gains.rho[k],
                    geo.tau_targets_pr[k] * f,
                ));
            }
        }
        let direct = (!direct_paths.is_empty()).then(|| {
            let mut d = Array2::zeros((n, l));
            for (resp, gain, delay) in &direct_paths {
                let w = delay_by_samples(zc.samples(), *delay, mode);
                for (i, a) in resp.iter().enumerate() {
                    let ag = a * gain;
                    for (t, wt) in w.iter().enumerate() {
                        d[[i, t]] += ag * wt;
                    }
                }
            }
            d
        });

        Ok(Self {
            antennas: n,
            samples: l,
            relay_response,
            relay_shift: geo.tau_ris_pr * f,
            mode,
            direct,
            noise_sd: (scenario.noise_variance() / 2.0).sqrt(),
        })
    }

    /// `Y` for one epoch given the RIS output `x`.
    pub fn receive<R: Rng + ?Sized>(&self, x: &[C64], rng: &mut R) -> SnapshotMatrix {
        let xd = delay_by_samples(x, self.relay_shift, self.mode);
        let mut y = Array2::zeros((self.antennas, self.samples));
        for (i, a) in self.relay_response.iter().enumerate() {
            let mut row = y.row_mut(i);
            for (yt, xt) in row.iter_mut().zip(&xd) {
                *yt = a * xt;
            }
        }
        if let Some(d) = &self.direct {
            y += d;
        }
        if self.noise_sd > 0.0 {
            y.iter_mut()
                .for_each(|v| *v += complex_normal(rng, self.noise_sd));
        }
        SnapshotMatrix {
            data: y,
            role: SnapshotRole::PrRaw,
        }
    }
}

impl PrChannel {
    /// The channel seen through the PR combiner `z = w^H y`.
    ///
    /// Unless `per_antenna_noise` is set, receiver noise is drawn directly
    /// after combining as `CN(0, sigma^2 |w|^2)`, which has the same
    /// distribution as combining independent per-antenna noise at a fraction
    /// of the cost.
    pub fn combined(&self, w: &[C64], per_antenna_noise: bool) -> Result<CombinedPr> {
        if w.len() != self.antennas {
            return Err(Error::invalid(format!(
                "combiner has {} weights for {} antennas",
                w.len(),
                self.antennas
            )));
        }
        let relay_gain = w
            .iter()
            .zip(&self.relay_response)
            .map(|(wi, a)| wi.conj() * a)
            .sum();
        let direct = self.direct.as_ref().map(|d| {
            let mut z = vec![C64::new(0.0, 0.0); self.samples];
            for (wi, row) in w.iter().zip(d.rows()) {
                let c = wi.conj();
                for (zt, dt) in z.iter_mut().zip(row) {
                    *zt += c * dt;
                }
            }
            z
        });
        let w_norm = w.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        Ok(CombinedPr {
            channel: self.clone(),
            w: w.to_vec(),
            relay_gain,
            direct,
            combined_sd: self.noise_sd * w_norm,
            per_antenna_noise,
        })
    }
}

/// [`PrChannel`] followed by a fixed combiner.
#[derive(Debug, Clone)]
pub struct CombinedPr {
    channel: PrChannel,
    w: Vec<C64>,
    relay_gain: C64,
    direct: Option<Vec<C64>>,
    combined_sd: f64,
    per_antenna_noise: bool,
}

impl CombinedPr {
    /// Beamformed samples for one epoch.
    pub fn receive<R: Rng + ?Sized>(&self, x: &[C64], rng: &mut R) -> Vec<C64> {
        if self.per_antenna_noise {
            let y = self.channel.receive(x, rng).data;
            let mut z = vec![C64::new(0.0, 0.0); y.ncols()];
            for (wi, row) in self.w.iter().zip(y.rows()) {
                let c = wi.conj();
                for (zt, yt) in z.iter_mut().zip(row) {
                    *zt += c * yt;
                }
            }
            return z;
        }
        let mut z = delay_by_samples(x, self.channel.relay_shift, self.channel.mode);
        z.iter_mut().for_each(|v| *v *= self.relay_gain);
        if let Some(d) = &self.direct {
            z.iter_mut().zip(d).for_each(|(a, b)| *a += b);
        }
        if self.combined_sd > 0.0 {
            z.iter_mut()
                .for_each(|v| *v += complex_normal(rng, self.combined_sd));
        }
        z
    }
}

/// Received snapshot `Y_{n,q}` at the PR for one epoch.
pub fn synthesize_pr_signal<R: Rng + ?Sized>(
    scenario: &Scenario,
    x: &[C64],
    zc: &ZcSequence,
    gains: &PathGains,
    rng: &mut R,
) -> Result<SnapshotMatrix> {
    if x.len() != zc.len() {
        return Err(Error::invalid(format!(
            "RIS output has {} samples, expected {}",
            x.len(),
            zc.len()
        )));
    }
    Ok(PrChannel::new(scenario, zc, gains)?.receive(x, rng))
}
