//! Configuration, snapshot persistence, report writing and the run pipelines
//! behind the `cssr` binary.

pub mod config;
pub mod report;
pub mod runner;
pub mod snapshot;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or command line; maps to exit code 1.
    #[error("{0}")]
    Validation(String),
    /// I/O trouble reading inputs or writing outputs; exit code 1.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    /// Malformed snapshot file; exit code 1.
    #[error("snapshot {path}: {reason}")]
    Snapshot { path: String, reason: String },
    /// A solver finished without reaching its tolerances; exit code 2.
    #[error("solver did not converge: {0}")]
    NonConvergence(String),
    /// The evolution mass guard tripped; exit code 3.
    #[error("instability abort: {0}")]
    Instability(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io { .. } | CliError::Snapshot { .. } => 1,
            CliError::NonConvergence(_) => 2,
            CliError::Instability(_) => 3,
        }
    }
}

impl From<cssr_core::CoreError> for CliError {
    fn from(err: cssr_core::CoreError) -> Self {
        match err {
            cssr_core::CoreError::Instability { .. } => CliError::Instability(err.to_string()),
            cssr_core::CoreError::NonConvergence { .. } => {
                CliError::NonConvergence(err.to_string())
            }
            other => CliError::Validation(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
