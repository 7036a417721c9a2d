//! Zadoff-Chu preamble generation and cyclic correlation.
//!
//! Lags follow the delay convention: correlating a copy of the reference that
//! was delayed by `d` samples produces its peak at lag `d`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::{Error, Result, C64};

/// Constant-amplitude zero-autocorrelation preamble.
#[derive(Clone, PartialEq)]
pub struct ZcSequence {
    length: usize,
    root: usize,
    samples: Vec<C64>,
}

impl fmt::Debug for ZcSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ZcSequence")
            .field("length", &self.length)
            .field("root", &self.root)
            .finish_non_exhaustive()
    }
}

impl ZcSequence {
    pub fn len(&self) -> usize {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        self.length == 0
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Generates `s_r[m] = exp(-j*pi*r*m*(m+1)/N)` for `m = 0..N`.
///
/// The exponent is reduced modulo `2N` in integer arithmetic before the
/// trigonometric evaluation, so long sequences keep full phase precision.
pub fn generate_zc(length: usize, root: usize) -> Result<ZcSequence> {
    if length == 0 || length % 2 == 0 {
        return Err(Error::invalid(format!(
            "Zadoff-Chu length must be a positive odd integer, got {length}"
        )));
    }
    if root == 0 || root >= length {
        return Err(Error::invalid(format!(
            "Zadoff-Chu root must lie in 1..{length}, got {root}"
        )));
    }
    if gcd(root, length) != 1 {
        return Err(Error::invalid(format!(
            "Zadoff-Chu root {root} is not coprime with length {length}"
        )));
    }
    let modulus = 2 * length as u128;
    let samples = (0..length as u128)
        .map(|m| {
            let k = (root as u128 * ((m * (m + 1)) % modulus)) % modulus;
            C64::from_polar(1.0, -PI * k as f64 / length as f64)
        })
        .collect();
    Ok(ZcSequence {
        length,
        root,
        samples,
    })
}

/// Cyclically delays `s` by `shift` samples: `out[n] = s[(n - shift) mod L]`.
pub fn cyclic_delay(s: &[C64], shift: usize) -> Vec<C64> {
    let mut out = s.to_vec();
    if !s.is_empty() {
        out.rotate_right(shift % s.len());
    }
    out
}

/// `|sum_m seq[m] * conj(seq[(m - shift) mod N])|`.
pub fn cyclic_autocorrelation(seq: &ZcSequence, shift: usize) -> Result<f64> {
    if shift >= seq.len() {
        return Err(Error::invalid(format!(
            "shift {shift} outside 0..{}",
            seq.len()
        )));
    }
    let n = seq.len();
    let s = seq.samples();
    let acc: C64 = (0..n).map(|m| s[m] * s[(m + n - shift) % n].conj()).sum();
    Ok(acc.norm())
}

/// Subtracts the sample mean.
pub fn center_series(z: &[C64]) -> Result<Vec<C64>> {
    if z.is_empty() {
        return Err(Error::invalid("cannot center an empty series"));
    }
    let mean = z.iter().sum::<C64>() / z.len() as f64;
    Ok(z.iter().map(|&v| v - mean).collect())
}

/// Correlation magnitudes indexed by lag.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationProfile {
    pub magnitudes: Vec<f64>,
    /// Largest magnitude; the divisor used by [`CorrelationProfile::normalized`].
    pub normalization: f64,
}

impl CorrelationProfile {
    pub fn from_magnitudes(magnitudes: Vec<f64>) -> Self {
        let normalization = magnitudes.iter().copied().fold(0.0, f64::max);
        Self {
            magnitudes,
            normalization,
        }
    }

    pub fn len(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnitudes.is_empty()
    }

    /// Peak-normalized profile; all zeros when the profile is identically zero.
    pub fn normalized(&self) -> Vec<f64> {
        if self.normalization > 0.0 {
            self.magnitudes
                .iter()
                .map(|m| m / self.normalization)
                .collect()
        } else {
            vec![0.0; self.magnitudes.len()]
        }
    }

    pub fn argmax(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, &m) in self.magnitudes.iter().enumerate() {
            if best.is_none_or(|b| m > self.magnitudes[b]) {
                best = Some(i);
            }
        }
        best
    }
}

/// Direct lag-domain evaluation of `sum_n test[n] * conj(reference[n - lag])`.
///
/// O(L^2); kept as the reference definition for the FFT path.
pub fn correlate_direct(reference: &[C64], test: &[C64]) -> Result<Vec<C64>> {
    check_lengths(reference.len(), test.len())?;
    let l = reference.len();
    Ok((0..l)
        .map(|lag| {
            (0..l)
                .map(|n| test[n] * reference[(n + l - lag) % l].conj())
                .sum()
        })
        .collect())
}

fn check_lengths(reference: usize, test: usize) -> Result<()> {
    if reference != test {
        return Err(Error::invalid(format!(
            "test length {test} does not match reference length {reference}"
        )));
    }
    if reference == 0 {
        return Err(Error::invalid("empty correlation input"));
    }
    Ok(())
}

/// FFT-backed circular correlator bound to one reference sequence.
///
/// Plans and the reference spectrum are computed once; the correlator is
/// `Sync` and is shared by all trials of a sweep.
#[derive(Clone)]
pub struct Correlator {
    reference: Vec<C64>,
    reference_spectrum_conj: Vec<C64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Correlator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Correlator")
            .field("len", &self.reference.len())
            .finish_non_exhaustive()
    }
}

impl Correlator {
    pub fn new(reference: &[C64]) -> Self {
        let l = reference.len();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(l);
        let inverse = planner.plan_fft_inverse(l);
        let mut spectrum = reference.to_vec();
        forward.process(&mut spectrum);
        let reference_spectrum_conj = spectrum.into_iter().map(|v| v.conj()).collect();
        Self {
            reference: reference.to_vec(),
            reference_spectrum_conj,
            forward,
            inverse,
        }
    }

    pub fn for_zc(zc: &ZcSequence) -> Self {
        Self::new(zc.samples())
    }

    pub fn len(&self) -> usize {
        self.reference.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reference.is_empty()
    }

    pub fn reference(&self) -> &[C64] {
        &self.reference
    }

    /// Complex circular correlation, same convention as [`correlate_direct`].
    pub fn correlate(&self, test: &[C64]) -> Result<Vec<C64>> {
        check_lengths(self.reference.len(), test.len())?;
        let mut buf = test.to_vec();
        self.correlate_in_place(&mut buf);
        Ok(buf)
    }

    /// In-place variant; `buf` must have the reference length.
    pub fn correlate_in_place(&self, buf: &mut [C64]) {
        debug_assert_eq!(buf.len(), self.reference.len());
        self.forward.process(buf);
        for (v, r) in buf.iter_mut().zip(&self.reference_spectrum_conj) {
            *v *= r;
        }
        self.inverse.process(buf);
        let scale = 1.0 / buf.len() as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }

    pub fn profile(&self, test: &[C64]) -> Result<CorrelationProfile> {
        let corr = self.correlate(test)?;
        Ok(CorrelationProfile::from_magnitudes(
            corr.iter().map(|c| c.norm()).collect(),
        ))
    }
}

/// Magnitude of the circular cross-correlation between the preamble and a
/// test series of the same length.
pub fn cross_correlate(reference: &ZcSequence, test: &[C64]) -> Result<CorrelationProfile> {
    check_lengths(reference.len(), test.len())?;
    Correlator::for_zc(reference).profile(test)
}
