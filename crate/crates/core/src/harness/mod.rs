//! Experiment harness: configuration, scene generation and sweeps.

pub mod config;
pub mod scene;
pub mod sweep;

pub use config::{apply_override, Axes, MetricsConfig, ScenarioConfig, SweepConfig};
pub use scene::{random_scene, DelayWindow, SceneConstraints};
pub use sweep::{run_sweep, simulate, write_csv, GridIndex, ResultRow, CSV_HEADER};
