//! Reproducible experiment runner for `sparse-recover`.
//!
//! Every run is a pure function of its [`ExperimentSpec`]: all randomness
//! flows from a ChaCha8 generator seeded with `spec.seed`. A run writes a
//! CSV trace (or table) and `summary.json` into `spec.out_dir`.

mod output;
mod run;
mod spec;

use std::path::PathBuf;

use sparse_recover::RecoveryError;
use thiserror::Error;

pub use output::{emit_clouds, emit_trajectory, Summary, CLOUD_HEADER, TRAJECTORY_HEADER};
pub use run::{run, RunOutput, BOUNDS_FILE, SUMMARY_FILE, TRAJECTORY_FILE};
pub use spec::{
    parse_config, BetaChoice, Cli, Command, CommandKind, ExperimentSpec, Mode, Params, Variant, THREADS_ENV,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid experiment: {0}")]
    Usage(String),
    #[error("assumption violated: {0}")]
    Assumption(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Assumption(_) => 3,
            Self::Numerical(_) | Self::Io { .. } => 4,
        }
    }
}

impl From<RecoveryError> for CliError {
    fn from(err: RecoveryError) -> Self {
        match err {
            RecoveryError::AssumptionViolation(msg) => Self::Assumption(msg),
            RecoveryError::Numerical(msg) => Self::Numerical(msg),
            other => Self::Usage(other.to_string()),
        }
    }
}
