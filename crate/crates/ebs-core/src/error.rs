use thiserror::Error;

/// Errors surfaced by parsing, simulation, and the stopping rule.
#[derive(Debug, Error)]
pub enum Error {
    /// A Hamiltonian line that could not be understood. Lines are 1-based.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A term whose string length disagrees with the rest of the file.
    #[error("line {line}: term acts on {found} qubits, expected {expected}")]
    LengthMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },

    /// No non-identity term survived merging and zero-coefficient removal.
    #[error("no non-identity terms left after parsing")]
    EmptyHamiltonian,

    /// Dense simulation is capped well below the mask width.
    #[error("{n} qubits exceeds the {max}-qubit simulator cap")]
    TooManyQubits { n: usize, max: usize },

    /// Squared amplitudes that do not sum to one.
    #[error("state norm deviates from 1 by {deviation:.3e} (tolerance 1e-10)")]
    NotNormalized { deviation: f64 },

    /// The eigensolver exhausted its iteration budget.
    #[error("ground state not converged after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    /// A grouping used with a Hamiltonian it was not built from.
    #[error("grouping covers {grouping_terms} terms on {grouping_qubits} qubits, Hamiltonian has {hamiltonian_terms} on {hamiltonian_qubits}")]
    GroupingMismatch {
        grouping_terms: usize,
        grouping_qubits: usize,
        hamiltonian_terms: usize,
        hamiltonian_qubits: usize,
    },

    /// A numeric argument outside its domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The round cap admits fewer than `min_samples` samples, so the adaptive
    /// rule has no check point and degenerates to the fixed-N baseline.
    #[error("round cap {cap_rounds} admits no check at or above {min_samples} samples")]
    CapTooSmall { cap_rounds: u64, min_samples: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
