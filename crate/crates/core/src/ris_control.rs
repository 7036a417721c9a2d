//! PR receive beamformer and RIS reflection matrices.
//!
//! The RIS response seen by the PR toward a target at `theta` through one
//! reflection vector `v` is `v^T h(theta)` with `h(theta) = a(phi) o a(theta)`,
//! where `phi` is the departure angle toward the PR and `o` is the elementwise
//! product.

use std::f64::consts::PI;

use ndarray::{Array2, ArrayView1};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::{steering_vector, ula_response};
use crate::{Error, Result, C64};

/// PR combining weights; `z = w^H y`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamWeights {
    pub w: Vec<C64>,
}

impl BeamWeights {
    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    /// `w^H y` for each column of an antennas x samples snapshot.
    pub fn combine(&self, y: &Array2<C64>) -> Result<Vec<C64>> {
        if y.nrows() != self.w.len() {
            return Err(Error::invalid(format!(
                "snapshot has {} antennas, beamformer {}",
                y.nrows(),
                self.w.len()
            )));
        }
        let mut z = vec![C64::new(0.0, 0.0); y.ncols()];
        for (wi, row) in self.w.iter().zip(y.rows()) {
            let c = wi.conj();
            for (zt, yt) in z.iter_mut().zip(row) {
                *zt += c * yt;
            }
        }
        Ok(z)
    }
}

/// Matched beamformer toward the RIS, scaled for unit gain on that path.
pub fn pr_beamformer(theta_ris_pr_deg: f64, num_antennas: usize) -> Result<BeamWeights> {
    let a = steering_vector(num_antennas, theta_ris_pr_deg)?;
    let n = num_antennas as f64;
    Ok(BeamWeights {
        w: a.into_iter().map(|v| v / n).collect(),
    })
}

/// Effective RIS response `h(theta) = a(phi) o a(theta)`.
pub fn effective_response(num_elements: usize, phi_ris_pr_deg: f64, theta_deg: f64) -> Result<Vec<C64>> {
    let a_phi = steering_vector(num_elements, phi_ris_pr_deg)?;
    let a_theta = steering_vector(num_elements, theta_deg)?;
    Ok(a_phi.iter().zip(&a_theta).map(|(p, t)| p * t).collect())
}

/// Unit-modulus RIS configuration, one column per epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionMatrix {
    entries: Array2<C64>,
    phase_index: usize,
}

impl ReflectionMatrix {
    /// Wraps an `M x N_epoch` matrix after checking unit modulus.
    pub fn from_entries(entries: Array2<C64>, phase_index: usize) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("empty reflection matrix"));
        }
        if let Some(bad) = entries.iter().find(|v| (v.norm() - 1.0).abs() > 1e-9) {
            return Err(Error::invalid(format!(
                "reflection coefficient {bad} is not unit modulus"
            )));
        }
        Ok(Self {
            entries,
            phase_index,
        })
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn num_elements(&self) -> usize {
        self.entries.nrows()
    }

    pub fn epochs(&self) -> usize {
        self.entries.ncols()
    }

    /// 0 for the probing phase, `q` for the phase directed at estimate `q`.
    pub fn phase_index(&self) -> usize {
        self.phase_index
    }

    pub fn column(&self, n: usize) -> ArrayView1<'_, C64> {
        self.entries.column(n)
    }

    /// Per-epoch complex gain `v_n^T h(theta)`.
    pub fn gain_toward(&self, theta_deg: f64, phi_ris_pr_deg: f64) -> Result<Vec<C64>> {
        let h = effective_response(self.num_elements(), phi_ris_pr_deg, theta_deg)?;
        Ok(self
            .entries
            .columns()
            .into_iter()
            .map(|v| v.iter().zip(&h).map(|(a, b)| a * b).sum())
            .collect())
    }
}

/// Random phase-only probing matrix whose columns are steered away from the AP.
///
/// A complex Gaussian matrix is projected onto the orthogonal complement of
/// `conj(h(theta_ap))`, which nulls `v^T h(theta_ap)` exactly, and then only
/// the phases are kept. Restoring unit modulus leaves a partial null whose
/// average depth is about `1 - pi/4` in power.
pub fn initial_reflection_matrix<R: Rng + ?Sized>(
    theta_ap_ris_deg: f64,
    phi_ris_pr_deg: f64,
    num_elements: usize,
    epochs: usize,
    rng: &mut R,
) -> Result<ReflectionMatrix> {
    if num_elements < 2 {
        return Err(Error::invalid("the AP null needs at least two RIS elements"));
    }
    if epochs == 0 {
        return Err(Error::invalid("at least one probing epoch is required"));
    }
    let h = effective_response(num_elements, phi_ris_pr_deg, theta_ap_ris_deg)?;
    // a = conj(h); P = I - a a^H / |a|^2, so (P g)_i = g_i - conj(h_i) (h . g) / M
    let m = num_elements as f64;
    let sd = 0.5f64.sqrt();
    let mut entries = Array2::zeros((num_elements, epochs));
    let mut g = vec![C64::new(0.0, 0.0); num_elements];
    for n in 0..epochs {
        for gi in g.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *gi = C64::new(re * sd, im * sd);
        }
        let proj: C64 = h.iter().zip(&g).map(|(a, b)| a * b).sum::<C64>() / m;
        for i in 0..num_elements {
            let p = g[i] - h[i].conj() * proj;
            let phase = if p.norm() > 0.0 { p.arg() } else { 0.0 };
            entries[[i, n]] = C64::from_polar(1.0, phase);
        }
    }
    ReflectionMatrix::from_entries(entries, 0)
}

/// Configuration that co-phases the path from `theta_hat` toward the PR.
///
/// `v = conj(a(phi) o a(theta_hat))`, repeated for every epoch, so that
/// `v^T h(theta_hat) = M`.
pub fn directed_reflection_matrix(
    theta_hat_deg: f64,
    phi_ris_pr_deg: f64,
    num_elements: usize,
    epochs: usize,
    phase_index: usize,
) -> Result<ReflectionMatrix> {
    if epochs == 0 {
        return Err(Error::invalid("at least one epoch is required"));
    }
    let h = effective_response(num_elements, phi_ris_pr_deg, theta_hat_deg)?;
    let entries = Array2::from_shape_fn((num_elements, epochs), |(i, _)| h[i].conj());
    ReflectionMatrix::from_entries(entries, phase_index)
}

/// Phase-only vector whose entries are uniform on the circle.
pub fn random_phase_vector<R: Rng + ?Sized>(num_elements: usize, rng: &mut R) -> Vec<C64> {
    (0..num_elements)
        .map(|_| C64::from_polar(1.0, rng.random_range(0.0..2.0 * PI)))
        .collect()
}

/// `h(theta)` from the sine of the angle, skipping range checks.
pub(crate) fn effective_response_sin(a_phi: &[C64], sin_theta: f64) -> Vec<C64> {
    ula_response(a_phi.len(), sin_theta)
        .into_iter()
        .zip(a_phi)
        .map(|(t, p)| t * p)
        .collect()
}
