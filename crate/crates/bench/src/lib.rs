//! Monte Carlo experiment harness around `ojak-core`.
//!
//! Every subcommand of the `ojak` binary is a thin wrapper over a function in
//! this crate, so the integration tests can drive them without a subprocess.

pub mod commands;
pub mod config;
pub mod oracle;
pub mod output;
pub mod runner;
pub mod summary;
pub mod sweep;
pub mod verify;

use thiserror::Error;

pub use config::{CheckerName, ExperimentConfig, InitSpec, Overrides, ResolvedExperiment, ScheduleSpec};
pub use runner::{run_trials, TrialOutcome};
pub use summary::{fit_loglog_slope, quantile, ExperimentSummary, PointAggregate};

#[derive(Debug, Error)]
pub enum BenchError {
    /// Bad or inconsistent configuration; nothing has been written.
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl BenchError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Runtime(_) => 1,
        }
    }
}
