//! Angle and delay estimation from beamformed PR epochs.
//!
//! The probing phase yields one beamformed row per epoch. Correlating each row
//! with the preamble separates the paths by delay; every path `k` then leaves a
//! column `c_l ~ V0^T h(theta_k)` at its lag `l`. The AoA spectrum is the
//! lag-averaged Bartlett scan of those columns,
//!
//! ```text
//! S(theta) = h^H conj(V0) R V0^T h / h^H conj(V0) V0^T h,   R = sum_l c_l c_l^H,
//! ```
//!
//! where lags of the AP relay path are left out of `R`.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::channel::{ula_response, SnapshotMatrix};
use crate::ris_control::ReflectionMatrix;
use crate::signal::{center_series, Correlator};
use crate::{Error, Result, C64};

/// Delay window of the receiver.
///
/// Cyclic correlation only resolves delays modulo the preamble period. Lags
/// are unwrapped into the window that starts `guard_samples` before the
/// relay delay, and anything within `guard_samples` of the relay delay or of
/// the known direct AP -> PR delay is discarded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayGate {
    pub relay_delay_s: f64,
    pub guard_samples: usize,
    /// Direct AP -> PR delay, rejected like the relay path when present.
    pub direct_delay_s: Option<f64>,
}

impl DelayGate {
    pub fn new(relay_delay_s: f64, guard_samples: usize) -> Self {
        Self {
            relay_delay_s,
            guard_samples,
            direct_delay_s: None,
        }
    }

    fn window_start(&self, sample_rate_hz: f64) -> i64 {
        (self.relay_delay_s * sample_rate_hz).floor() as i64 - self.guard_samples as i64
    }

    /// Absolute delay in samples of a correlation lag.
    pub fn unwrap_lag(&self, lag: usize, len: usize, sample_rate_hz: f64) -> i64 {
        let s0 = self.window_start(sample_rate_hz);
        s0 + (lag as i64 - s0).rem_euclid(len as i64)
    }

    /// True when an unwrapped delay (in samples) may belong to a target.
    pub fn admits(&self, delay_samples: f64, len: usize, sample_rate_hz: f64) -> bool {
        let guard = self.guard_samples as f64;
        if delay_samples <= self.relay_delay_s * sample_rate_hz + guard {
            return false;
        }
        !self.near_direct(delay_samples.rem_euclid(len as f64), len, sample_rate_hz)
    }

    fn near_direct(&self, lag: f64, len: usize, f: f64) -> bool {
        self.direct_delay_s.is_some_and(|d| {
            cyclic_distance(lag, (d * f).rem_euclid(len as f64), len) <= self.guard_samples as f64 + 0.5
        })
    }

    /// Lags attributed to the relay (or direct) path.
    pub fn excluded_lags(&self, len: usize, sample_rate_hz: f64) -> Vec<bool> {
        let relay = (self.relay_delay_s * sample_rate_hz).rem_euclid(len as f64);
        let reach = self.guard_samples as f64 + 0.5;
        (0..len)
            .map(|l| {
                cyclic_distance(l as f64, relay, len) <= reach
                    || self.near_direct(l as f64, len, sample_rate_hz)
            })
            .collect()
    }
}

fn cyclic_distance(a: f64, b: f64, len: usize) -> f64 {
    let d = (a - b).rem_euclid(len as f64);
    d.min(len as f64 - d)
}

/// Indices of strict local maxima above `threshold`.
///
/// A flat top counts once, at its first index. Without `cyclic` the ends are
/// compared against negative infinity.
pub fn local_maxima(values: &[f64], threshold: f64, cyclic: bool) -> Vec<usize> {
    let n = values.len();
    let at = |i: isize| -> f64 {
        if cyclic {
            values[i.rem_euclid(n as isize) as usize]
        } else if i < 0 || i >= n as isize {
            f64::NEG_INFINITY
        } else {
            values[i as usize]
        }
    };
    let mut peaks = Vec::new();
    for i in 0..n {
        let v = values[i];
        if !(v > threshold) || !(v > at(i as isize - 1)) {
            continue;
        }
        let mut j = i as isize;
        let mut steps = 0;
        while steps < n && at(j + 1) == v {
            j += 1;
            steps += 1;
        }
        if steps < n && v > at(j + 1) {
            peaks.push(i);
        }
    }
    peaks
}

/// Greedy suppression: keeps the strongest peak of every group of peaks that
/// `too_close` links, returning survivors in index order.
pub fn suppress_close(peaks: &[usize], values: &[f64], too_close: impl Fn(usize, usize) -> bool) -> Vec<usize> {
    let mut order = peaks.to_vec();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for p in order {
        if kept.iter().all(|&k| !too_close(k, p)) {
            kept.push(p);
        }
    }
    kept.sort_unstable();
    kept
}

/// Uniform scan grid `-limit, -limit + step, ..., limit` in degrees.
pub fn scan_grid(step_deg: f64, limit_deg: f64) -> Result<Vec<f64>> {
    if !(step_deg > 0.0 && step_deg.is_finite()) {
        return Err(Error::invalid("grid step must be positive"));
    }
    if !(limit_deg > 0.0 && limit_deg < 90.0) {
        return Err(Error::invalid("grid limit must lie in (0, 90)"));
    }
    let n = (2.0 * limit_deg / step_deg + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| -limit_deg + i as f64 * step_deg).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AoaMethod {
    /// Lag-averaged Bartlett scan.
    BeamScan,
    /// Normalized LMS fit of the grid dictionary at the strongest lags.
    Nlms { step: f64, passes: usize },
}

impl Default for AoaMethod {
    fn default() -> Self {
        AoaMethod::BeamScan
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AoaParams {
    pub grid_step_deg: f64,
    pub grid_limit_deg: f64,
    pub g_theta: f64,
    pub min_separation_deg: f64,
    pub method: AoaMethod,
}

impl Default for AoaParams {
    fn default() -> Self {
        Self {
            grid_step_deg: 0.1,
            grid_limit_deg: 89.9,
            g_theta: 0.3,
            min_separation_deg: 0.5,
            method: AoaMethod::BeamScan,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AoaEstimate {
    /// Detected angles, ascending.
    pub angles_deg: Vec<f64>,
    pub grid_deg: Vec<f64>,
    /// Peak-normalized spectrum over the grid.
    pub spectrum: Vec<f64>,
}

impl AoaEstimate {
    pub fn count(&self) -> usize {
        self.angles_deg.len()
    }
}

/// Correlated probing data and the quadratic forms behind the AoA spectrum.
#[derive(Debug, Clone)]
pub struct ProbeAnalysis {
    /// Epochs x lags correlation of the rows. Rows are not centered: the mean
    /// of the preamble would leak a constant floor into every lag.
    corr: Array2<C64>,
    excluded: Vec<bool>,
    v0: Array2<C64>,
    a_phi: Vec<C64>,
    /// Diagonal sums of `diag(conj a_phi) Q diag(a_phi)` for offsets `0..M`.
    q_diag: Vec<C64>,
    p_diag: Vec<C64>,
    signal_energy: f64,
    total_energy: f64,
}

impl ProbeAnalysis {
    pub fn new(
        z0: &SnapshotMatrix,
        v0: &ReflectionMatrix,
        phi_ris_pr_deg: f64,
        correlator: &Correlator,
        gate: &DelayGate,
        sample_rate_hz: f64,
    ) -> Result<Self> {
        let (n0, l) = z0.data.dim();
        if n0 != v0.epochs() {
            return Err(Error::invalid(format!(
                "{n0} probing rows for {} reflection epochs",
                v0.epochs()
            )));
        }
        if l != correlator.len() {
            return Err(Error::invalid("probing rows do not match the preamble length"));
        }
        if !(phi_ris_pr_deg.abs() < 90.0) {
            return Err(Error::invalid("departure angle outside (-90, 90)"));
        }
        let m = v0.num_elements();
        let mut corr = Array2::zeros((n0, l));
        for (n, row) in z0.data.rows().into_iter().enumerate() {
            let mut buf = row.to_vec();
            correlator.correlate_in_place(&mut buf);
            corr.row_mut(n).assign(&ndarray::ArrayView1::from(&buf[..]));
        }
        let excluded = gate.excluded_lags(l, sample_rate_hz);

        // R over admissible lags, Hermitian so only the upper triangle is summed
        let mut r = Array2::<C64>::zeros((n0, n0));
        let mut total_energy = 0.0;
        let mut signal_energy = 0.0;
        let ct: Array2<C64> = corr.t().to_owned();
        for (lag, col) in ct.rows().into_iter().enumerate() {
            let e: f64 = col.iter().map(|c| c.norm_sqr()).sum();
            total_energy += e;
            if excluded[lag] {
                continue;
            }
            signal_energy += e;
            for a in 0..n0 {
                let ca = col[a];
                for b in a..n0 {
                    r[[a, b]] += ca * col[b].conj();
                }
            }
        }
        for a in 0..n0 {
            for b in 0..a {
                r[[a, b]] = r[[b, a]].conj();
            }
        }

        let v0m = v0.entries().clone();
        let conj_v0 = v0m.mapv(|v| v.conj());
        let q = conj_v0.dot(&r).dot(&v0m.t());
        let p = conj_v0.dot(&v0m.t());
        let a_phi = ula_response(m, phi_ris_pr_deg.to_radians().sin());
        let diag_sums = |mat: &Array2<C64>| -> Vec<C64> {
            (0..m)
                .map(|d| {
                    (0..m - d)
                        .map(|i| a_phi[i].conj() * mat[[i, i + d]] * a_phi[i + d])
                        .sum()
                })
                .collect()
        };
        Ok(Self {
            q_diag: diag_sums(&q),
            p_diag: diag_sums(&p),
            corr,
            excluded,
            v0: v0m,
            a_phi,
            signal_energy,
            total_energy,
        })
    }

    pub fn correlations(&self) -> &Array2<C64> {
        &self.corr
    }

    /// True when nothing but the gated paths (or numerical dust) was received.
    pub fn is_empty_scene(&self) -> bool {
        self.total_energy == 0.0 || self.signal_energy <= 1e-20 * self.total_energy
    }

    fn hermitian_form(diag: &[C64], sin_theta: f64) -> f64 {
        let e = ula_response(diag.len(), sin_theta);
        let mut s = diag[0].re;
        for d in 1..diag.len() {
            s += 2.0 * (diag[d] * e[d]).re;
        }
        s
    }

    /// Un-normalized beam-scan power at one angle.
    pub fn power(&self, theta_deg: f64) -> f64 {
        let u = theta_deg.to_radians().sin();
        let den = Self::hermitian_form(&self.p_diag, u);
        if den > 0.0 {
            (Self::hermitian_form(&self.q_diag, u) / den).max(0.0)
        } else {
            0.0
        }
    }

    fn nlms_spectrum(&self, grid: &[f64], step: f64, passes: usize) -> Vec<f64> {
        let (n0, l) = self.corr.dim();
        let m = self.a_phi.len();
        // dictionary g_n(theta_j) = v_n^T h(theta_j)
        let mut dict = Array2::<C64>::zeros((n0, grid.len()));
        for (j, &th) in grid.iter().enumerate() {
            let h = crate::ris_control::effective_response_sin(&self.a_phi, th.to_radians().sin());
            for n in 0..n0 {
                dict[[n, j]] = (0..m).map(|i| self.v0[[i, n]] * h[i]).sum();
            }
        }
        let row_norm: Vec<f64> = dict
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|v| v.norm_sqr()).sum::<f64>())
            .collect();
        let energy: Vec<f64> = (0..l)
            .map(|lag| {
                if self.excluded[lag] {
                    0.0
                } else {
                    self.corr.column(lag).iter().map(|c| c.norm_sqr()).sum()
                }
            })
            .collect();
        let emax = energy.iter().copied().fold(0.0, f64::max);
        let mut lags: Vec<usize> = local_maxima(&energy, 0.1 * emax, true);
        lags.sort_by(|&a, &b| energy[b].total_cmp(&energy[a]).then(a.cmp(&b)));
        lags.truncate(16);

        let mut spectrum = vec![0.0; grid.len()];
        let mut coef = vec![C64::new(0.0, 0.0); grid.len()];
        for lag in lags {
            coef.iter_mut().for_each(|c| *c = C64::new(0.0, 0.0));
            for _ in 0..passes {
                for n in 0..n0 {
                    if row_norm[n] == 0.0 {
                        continue;
                    }
                    let row = dict.row(n);
                    let pred: C64 = row.iter().zip(&coef).map(|(g, c)| g * c).sum();
                    let err = self.corr[[n, lag]] - pred;
                    let gain = err * (step / row_norm[n]);
                    for (c, g) in coef.iter_mut().zip(row) {
                        *c += g.conj() * gain;
                    }
                }
            }
            for (s, c) in spectrum.iter_mut().zip(&coef) {
                *s += c.norm_sqr();
            }
        }
        spectrum
    }

    pub fn estimate(&self, params: &AoaParams) -> Result<AoaEstimate> {
        let grid = scan_grid(params.grid_step_deg, params.grid_limit_deg)?;
        if !(params.g_theta > 0.0 && params.g_theta < 1.0) {
            return Err(Error::invalid("g_theta must lie in (0, 1)"));
        }
        let spectrum = match params.method {
            AoaMethod::BeamScan => grid.iter().map(|&t| self.power(t)).collect(),
            AoaMethod::Nlms { step, passes } => {
                if !(step > 0.0 && step < 2.0) || passes == 0 {
                    return Err(Error::invalid("NLMS step must lie in (0, 2) with at least one pass"));
                }
                self.nlms_spectrum(&grid, step, passes)
            }
        };
        let (mut angles_deg, spectrum) = pick_angles(&grid, spectrum, params);
        if self.is_empty_scene() {
            angles_deg.clear();
        }
        Ok(AoaEstimate {
            angles_deg,
            grid_deg: grid,
            spectrum,
        })
    }

    /// Angle that best explains the probing column at `lag`, searched within
    /// `half_width` (in sine space) of `center_deg`.
    pub fn refine_for_lag(&self, lag: usize, center_deg: f64, half_width: f64, limit_deg: f64) -> f64 {
        let (n0, _) = self.corr.dim();
        let m = self.a_phi.len();
        let b: Vec<C64> = (0..m)
            .map(|i| {
                let s: C64 = (0..n0).map(|n| self.v0[[i, n]].conj() * self.corr[[n, lag]]).sum();
                self.a_phi[i].conj() * s
            })
            .collect();
        let score = |u: f64| -> f64 {
            let e = ula_response(m, u);
            let num: C64 = b.iter().zip(&e).map(|(bi, ei)| bi * ei.conj()).sum();
            let den = Self::hermitian_form(&self.p_diag, u);
            if den > 0.0 {
                num.norm_sqr() / den
            } else {
                0.0
            }
        };
        let umax = limit_deg.to_radians().sin();
        let uc = center_deg.to_radians().sin();
        let lo = (uc - half_width).max(-umax);
        let hi = (uc + half_width).min(umax);
        if !(hi > lo) {
            return center_deg;
        }
        let steps = 80;
        let du = (hi - lo) / steps as f64;
        let mut best = (score(uc.clamp(lo, hi)), uc.clamp(lo, hi));
        for s in 0..=steps {
            let u = lo + s as f64 * du;
            let v = score(u);
            if v > best.0 {
                best = (v, u);
            }
        }
        // golden-section polish inside the neighbouring cells
        let (mut a, mut c) = ((best.1 - du).max(lo), (best.1 + du).min(hi));
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = c - g * (c - a);
        let mut x2 = a + g * (c - a);
        let (mut f1, mut f2) = (score(x1), score(x2));
        for _ in 0..40 {
            if f1 > f2 {
                c = x2;
                x2 = x1;
                f2 = f1;
                x1 = c - g * (c - a);
                f1 = score(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (c - a);
                f2 = score(x2);
            }
        }
        let u = 0.5 * (a + c);
        let u = if score(u) >= best.0 { u } else { best.1 };
        u.asin().to_degrees()
    }
}

impl ProbeAnalysis {
    /// Probing energy `sum_n |C[n, l]|^2` per lag, zero on gated lags.
    pub fn lag_energy(&self) -> Vec<f64> {
        (0..self.corr.ncols())
            .map(|lag| {
                if self.excluded[lag] {
                    0.0
                } else {
                    self.corr.column(lag).iter().map(|c| c.norm_sqr()).sum()
                }
            })
            .collect()
    }

    /// Strong probing lags that none of `explained` accounts for.
    ///
    /// A lag qualifies when it is a local maximum of the lag energy, its
    /// amplitude exceeds `g` times the strongest lag, and its energy exceeds
    /// `floor_ratio` times the median lag energy, which tracks the noise.
    pub fn residual_lags(&self, explained: &[usize], g: f64, floor_ratio: f64, separation: usize) -> Vec<usize> {
        let energy = self.lag_energy();
        let l = energy.len();
        let mut admissible: Vec<f64> = energy
            .iter()
            .zip(&self.excluded)
            .filter(|(_, &ex)| !ex)
            .map(|(&e, _)| e)
            .collect();
        if admissible.is_empty() {
            return Vec::new();
        }
        admissible.sort_by(f64::total_cmp);
        let median = admissible[admissible.len() / 2];
        let max = admissible[admissible.len() - 1];
        if max <= 0.0 || self.is_empty_scene() {
            return Vec::new();
        }
        let amp: Vec<f64> = energy.iter().map(|e| (e / max).sqrt()).collect();
        local_maxima(&amp, g, true)
            .into_iter()
            .filter(|&lag| energy[lag] > floor_ratio * median)
            .filter(|&lag| {
                explained
                    .iter()
                    .all(|&e| cyclic_distance(lag as f64, e as f64, l) > separation as f64)
            })
            .collect()
    }

    /// Beam scan restricted to `lags`, thresholded like [`Self::estimate`].
    /// Targets already explained elsewhere then no longer mask weaker ones.
    pub fn rescan(&self, lags: &[usize], params: &AoaParams) -> Result<Vec<f64>> {
        let grid = scan_grid(params.grid_step_deg, params.grid_limit_deg)?;
        let (n0, _) = self.corr.dim();
        let m = self.a_phi.len();
        let mut q_diag = vec![C64::new(0.0, 0.0); m];
        for &lag in lags {
            // b = diag(conj a_phi) conj(V0) c
            let b: Vec<C64> = (0..m)
                .map(|i| {
                    let s: C64 = (0..n0).map(|n| self.v0[[i, n]].conj() * self.corr[[n, lag]]).sum();
                    self.a_phi[i].conj() * s
                })
                .collect();
            for (d, q) in q_diag.iter_mut().enumerate() {
                *q += (0..m - d).map(|i| b[i] * b[i + d].conj()).sum::<C64>();
            }
        }
        let spectrum: Vec<f64> = grid
            .iter()
            .map(|&t| {
                let u = t.to_radians().sin();
                let den = Self::hermitian_form(&self.p_diag, u);
                if den > 0.0 {
                    (Self::hermitian_form(&q_diag, u) / den).max(0.0)
                } else {
                    0.0
                }
            })
            .collect();
        Ok(pick_angles(&grid, spectrum, params).0)
    }

}

/// Normalizes a spectrum by its peak and keeps the separated local maxima
/// above `g_theta`.
fn pick_angles(grid: &[f64], mut spectrum: Vec<f64>, params: &AoaParams) -> (Vec<f64>, Vec<f64>) {
    let peak = spectrum.iter().copied().fold(0.0, f64::max);
    if peak <= 0.0 {
        return (Vec::new(), spectrum);
    }
    spectrum.iter_mut().for_each(|s| *s /= peak);
    let peaks = local_maxima(&spectrum, params.g_theta, false);
    let kept = suppress_close(&peaks, &spectrum, |a, b| {
        (grid[a] - grid[b]).abs() < params.min_separation_deg
    });
    (kept.iter().map(|&i| grid[i]).collect(), spectrum)
}

/// Beam-scan AoA estimate from the probing epochs.
pub fn estimate_aoas(
    z0: &SnapshotMatrix,
    v0: &ReflectionMatrix,
    phi_ris_pr_deg: f64,
    correlator: &Correlator,
    gate: &DelayGate,
    sample_rate_hz: f64,
    params: &AoaParams,
) -> Result<AoaEstimate> {
    ProbeAnalysis::new(z0, v0, phi_ris_pr_deg, correlator, gate, sample_rate_hz)?.estimate(params)
}

/// Mean over the rows (epochs) of a beamformed snapshot.
pub fn average_epochs(z: &SnapshotMatrix) -> Result<Vec<C64>> {
    let n = z.rows();
    if n == 0 {
        return Err(Error::invalid("no epochs to average"));
    }
    let mut acc = vec![C64::new(0.0, 0.0); z.samples()];
    for row in z.data.rows() {
        for (a, v) in acc.iter_mut().zip(row) {
            *a += v;
        }
    }
    let scale = 1.0 / n as f64;
    acc.iter_mut().for_each(|a| *a *= scale);
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToaParams {
    pub g_tau: f64,
    /// Peaks closer than this many lags are merged.
    pub min_separation_lags: usize,
    pub sample_rate_hz: f64,
    pub gate: DelayGate,
}

/// Delays detected in one RIS direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToaEstimate {
    pub direction_index: usize,
    /// Ascending total delays in seconds.
    pub delays_s: Vec<f64>,
    pub lags: Vec<usize>,
    /// Un-normalized correlation magnitude at each detected lag.
    pub peak_magnitudes: Vec<f64>,
}

impl ToaEstimate {
    pub fn count(&self) -> usize {
        self.delays_s.len()
    }

    fn remove(&mut self, i: usize) {
        self.delays_s.remove(i);
        self.lags.remove(i);
        self.peak_magnitudes.remove(i);
    }
}

/// Peak search on the preamble correlation of an averaged epoch series.
pub fn estimate_toas(
    z: &[C64],
    correlator: &Correlator,
    params: &ToaParams,
    direction_index: usize,
) -> Result<ToaEstimate> {
    if !(params.g_tau > 0.0 && params.g_tau < 1.0) {
        return Err(Error::invalid("g_tau must lie in (0, 1)"));
    }
    if !(params.sample_rate_hz > 0.0) {
        return Err(Error::invalid("sample rate must be positive"));
    }
    let centered = center_series(z)?;
    let profile = correlator.profile(&centered)?;
    let l = profile.len();
    let norm = profile.normalized();
    let peaks = local_maxima(&norm, params.g_tau, true);
    let sep = params.min_separation_lags;
    let kept = suppress_close(&peaks, &norm, |a, b| {
        cyclic_distance(a as f64, b as f64, l) <= sep as f64
    });
    let f = params.sample_rate_hz;
    let mut found: Vec<(i64, usize, f64)> = kept
        .into_iter()
        .filter_map(|lag| {
            let d = params.gate.unwrap_lag(lag, l, f);
            params
                .gate
                .admits(d as f64, l, f)
                .then_some((d, lag, profile.magnitudes[lag]))
        })
        .collect();
    found.sort_by_key(|&(d, _, _)| d);
    Ok(ToaEstimate {
        direction_index,
        delays_s: found.iter().map(|&(d, _, _)| d as f64 / f).collect(),
        lags: found.iter().map(|&(_, lag, _)| lag).collect(),
        peak_magnitudes: found.iter().map(|&(_, _, m)| m).collect(),
    })
}

/// Total number of detected targets across directions.
pub fn count_targets(toas: &[ToaEstimate]) -> usize {
    toas.iter().map(ToaEstimate::count).sum()
}

/// Keeps each delay only in the direction where it is strongest.
///
/// A target seen through the sidelobes of several directed beams shows up at
/// the same lag in each of them; detections within `tolerance_lags` of each
/// other across directions are treated as one echo.
pub fn associate_exclusive(toas: &mut [ToaEstimate], tolerance_lags: usize, len: usize) {
    let mut all: Vec<(usize, usize)> = Vec::new();
    for (q, t) in toas.iter().enumerate() {
        all.extend((0..t.count()).map(|i| (q, i)));
    }
    let mut drop = vec![Vec::new(); toas.len()];
    for &(q, i) in &all {
        let me = (toas[q].peak_magnitudes[i], q);
        let beaten = all.iter().any(|&(q2, i2)| {
            q2 != q
                && cyclic_distance(toas[q].lags[i] as f64, toas[q2].lags[i2] as f64, len)
                    <= tolerance_lags as f64
                && {
                    let other = (toas[q2].peak_magnitudes[i2], q2);
                    other.0 > me.0 || (other.0 == me.0 && other.1 < me.1)
                }
        });
        if beaten {
            drop[q].push(i);
        }
    }
    for (t, d) in toas.iter_mut().zip(drop) {
        for &i in d.iter().rev() {
            t.remove(i);
        }
    }
}
