//! Adaptive-shot energy estimation for Pauli-decomposed Hamiltonians.
//!
//! The crate covers the full desk-scale pipeline:
//!
//! 1. [`pauli`]: Hamiltonians as weighted Pauli strings, parsed from a plain
//!    text format, with qubit-wise commutativity tests and outcome algebra.
//! 2. [`grouping`]: a greedy partition of the terms into jointly measurable
//!    families, largest coefficients first.
//! 3. [`simulator`]: exact ground states on up to 16 qubits and Born-rule
//!    outcome sampling in per-qubit measurement bases.
//! 4. [`estimator`]: unbiased one-sample energy estimators (one round per
//!    group, or a single round on one coefficient-weighted term) and the
//!    fixed Hoeffding round budget.
//! 5. [`ebs`]: empirical Bernstein stopping, which watches the running
//!    variance and stops as soon as a scheduled check certifies the target
//!    accuracy, capped by the Hoeffding budget.
//!
//! Energies are reported including the identity-term offset. All sampling is
//! reproducible: every source of randomness is an injected [`rand::RngCore`].

pub mod ebs;
pub mod error;
pub mod estimator;
pub mod grouping;
pub mod pauli;
pub mod simulator;

pub use ebs::{
    bernstein_radius, build_schedule, run_ebs, CheckPoint, CheckSchedule, EbsConfig,
    EstimationResult, RunningStats, Termination,
};
pub use error::{Error, Result};
pub use estimator::{
    hoeffding_rounds, hoeffding_rounds_for_norm, EnergySample, EnergySampler, FnSampler,
    GroupedEstimator, SingleShotEstimator,
};
pub use grouping::{greedy_group, Group, Grouping, MeasurementBasis};
pub use pauli::{Hamiltonian, Outcome, PauliLetter, PauliString, Term, MAX_QUBITS};
pub use simulator::{
    exact_estimator_variance, ground_state, hamiltonian_expectation, BasisDistribution,
    StateVector, MAX_SIM_QUBITS,
};

/// Amplitude type of [`StateVector`], re-exported for constructing states.
pub use num_complex::Complex64;
