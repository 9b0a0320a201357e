//! Benchmark harness: loads Hamiltonian files, runs adaptive and fixed-budget
//! estimation trials reproducibly, and aggregates the results into CSV
//! records and power-law fits.
//!
//! Everything here is deterministic under a fixed base seed: trials derive
//! their RNG streams from (estimator, accuracy, trial index) alone, records
//! are emitted in a fixed order no matter how the worker pool schedules them,
//! and the CSV bytes contain no timestamps or machine identifiers.

pub mod fit;
pub mod records;
pub mod runner;

use std::process::ExitCode;

/// Process-level failure classes with stable exit codes: 2 for usage, 3 for
/// input (parsing and I/O), 4 for numerical trouble.
#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numerical(String),
}

impl BenchError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            BenchError::Usage(_) => ExitCode::from(2),
            BenchError::Input(_) => ExitCode::from(3),
            BenchError::Numerical(_) => ExitCode::from(4),
        }
    }
}

impl From<ebs_core::Error> for BenchError {
    fn from(e: ebs_core::Error) -> Self {
        use ebs_core::Error;
        match e {
            Error::Parse { .. }
            | Error::LengthMismatch { .. }
            | Error::EmptyHamiltonian
            | Error::TooManyQubits { .. } => BenchError::Input(e.to_string()),
            Error::NotNormalized { .. }
            | Error::NoConvergence { .. }
            | Error::GroupingMismatch { .. }
            | Error::InvalidParameter(_)
            | Error::CapTooSmall { .. } => BenchError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for BenchError {
    fn from(e: std::io::Error) -> Self {
        BenchError::Input(e.to_string())
    }
}

impl From<csv::Error> for BenchError {
    fn from(e: csv::Error) -> Self {
        BenchError::Input(e.to_string())
    }
}

pub type BenchResult<T> = std::result::Result<T, BenchError>;
