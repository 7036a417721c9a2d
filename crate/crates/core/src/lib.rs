//! Monte-Carlo simulator for RIS-aided passive-radar target localization.
//!
//! An access point repeatedly broadcasts a Zadoff-Chu preamble. Echoes from
//! targets reach a reconfigurable intelligent surface (RIS), which reflects
//! them toward a multi-antenna passive radar (PR). The receiver estimates the
//! angle of arrival at the RIS and the total time of arrival of every echo,
//! then maps each pair onto a bistatic ellipse to recover target positions.
//!
//! Module map:
//!
//! * [`signal`]: preamble generation and cyclic correlation.
//! * [`geometry`]: forward sensing parameters and the ellipse/ray inverse map.
//! * [`channel`]: steering vectors, path delays, RIS and PR signal synthesis.
//! * [`ris_control`]: PR beamformer and RIS reflection matrices.
//! * [`estimation`]: AoA beam scan, ToA peak search and target counting.
//! * [`pipeline`]: one complete localization trial.
//! * [`metrics`]: MSE, detection probability and successful recovery.
//! * [`harness`]: configuration, scene generation, sweeps and CSV output.

pub mod channel;
pub mod error;
pub mod estimation;
pub mod geometry;
pub mod harness;
pub mod metrics;
pub mod pipeline;
pub mod ris_control;
pub mod rng;
pub mod signal;

pub use error::{Error, Result};

/// Complex baseband sample.
pub type C64 = num_complex::Complex64;
