use std::path::PathBuf;

use riesz_spectrum::error::Error as CoreError;
use thiserror::Error;

/// Failures of a command run. The exit code separates bad input (2) from
/// results that do not meet their guarantees (1).
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path} is not valid JSON: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },

    #[error("{0}")]
    Core(CoreError),

    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Core(e) if is_guarantee_failure(e) => 1,
            _ => 2,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

fn is_guarantee_failure(e: &CoreError) -> bool {
    matches!(
        e,
        CoreError::BoundViolated { .. }
            | CoreError::CoverConstruction { .. }
            | CoreError::TupleNotFound { .. }
            | CoreError::NonTermination { .. }
            | CoreError::DualNotConverged { .. }
    )
}

pub type Result<T> = std::result::Result<T, CliError>;
