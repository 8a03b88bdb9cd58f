//! Library side of the batch driver: experiment configuration, the runner
//! that produces `trajectory.csv` / `summary.json` / `points.csv`, and the
//! classical-MDS analysis of survey solutions.

pub mod config;
pub mod mds;
pub mod runner;

pub use config::{ExperimentConfig, Mode};
pub use runner::{run_experiment, CliOverrides, RunError};
