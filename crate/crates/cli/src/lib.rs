//! Command-line front end: classification, circle solves, continuation and
//! verification of stored results.

pub mod args;
pub mod commands;
pub mod files;

use std::path::Path;

use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_QUASIPERIODIC: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("seed is not on an invariant circle: {0}")]
    NotQuasiperiodic(String),
    #[error("{0}")]
    Solver(qpcircle::Error),
    #[error("verification failed: {0}")]
    Verify(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed file: {0}")]
    Schema(String),
    #[error("invalid arguments: {0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::NotQuasiperiodic(_) => EXIT_NOT_QUASIPERIODIC,
            CliError::Solver(_) | CliError::Verify(_) => EXIT_SOLVER,
            CliError::Io { .. } | CliError::Schema(_) | CliError::Usage(_) => EXIT_IO,
        }
    }
}

impl From<qpcircle::Error> for CliError {
    fn from(e: qpcircle::Error) -> Self {
        use qpcircle::Error as E;
        match e {
            E::NotQuasiperiodic { .. } | E::Overflow { .. } => CliError::NotQuasiperiodic(e.to_string()),
            E::InvalidArgument(m) => CliError::Usage(m),
            E::LengthMismatch { .. } | E::SymmetryViolation { .. } => CliError::Schema(e.to_string()),
            other => CliError::Solver(other),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Schema(e.to_string())
    }
}
