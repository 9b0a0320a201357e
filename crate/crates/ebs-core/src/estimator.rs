//! Unbiased single-sample energy estimators and the Hoeffding shot budget.
//!
//! Both estimators precompute every outcome distribution once per state, so
//! drawing a sample costs one binary search per measurement round plus a
//! parity evaluation per term.

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::grouping::{Grouping, MeasurementBasis};
use crate::pauli::{Hamiltonian, PauliString};
use crate::simulator::{BasisDistribution, StateVector};

/// One independent energy estimate together with its measurement cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySample {
    pub value: f64,
    /// Measurement rounds consumed producing this sample.
    pub rounds_cost: u64,
}

/// A source of independent, identically distributed energy samples with a
/// fixed per-sample round cost.
pub trait EnergySampler {
    fn rounds_per_sample(&self) -> u64;
    fn sample(&self, rng: &mut dyn RngCore) -> EnergySample;
}

/// Adapts a closure to [`EnergySampler`]; handy for synthetic sources.
pub struct FnSampler<F: Fn(&mut dyn RngCore) -> f64> {
    rounds_per_sample: u64,
    f: F,
}

impl<F: Fn(&mut dyn RngCore) -> f64> FnSampler<F> {
    pub fn new(rounds_per_sample: u64, f: F) -> Self {
        assert!(rounds_per_sample >= 1, "a sample costs at least one round");
        FnSampler {
            rounds_per_sample,
            f,
        }
    }
}

impl<F: Fn(&mut dyn RngCore) -> f64> EnergySampler for FnSampler<F> {
    fn rounds_per_sample(&self) -> u64 {
        self.rounds_per_sample
    }

    fn sample(&self, rng: &mut dyn RngCore) -> EnergySample {
        EnergySample {
            value: (self.f)(rng),
            rounds_cost: self.rounds_per_sample,
        }
    }
}

struct GroupCache {
    distribution: BasisDistribution,
    members: Vec<(f64, PauliString)>,
}

/// Draws one outcome per group and recombines all terms into one energy
/// sample, costing one measurement round per group.
///
/// The sample equals `offset + sum_i h_i o_i` with each `o_i` read off its
/// group's shared outcome, so its expectation over the RNG is the exact
/// energy and its spread never exceeds the coefficient one-norm.
pub struct GroupedEstimator {
    offset: f64,
    groups: Vec<GroupCache>,
}

impl GroupedEstimator {
    pub fn new(state: &StateVector, h: &Hamiltonian, grouping: &Grouping) -> Result<Self> {
        if grouping.num_terms() != h.num_terms() || grouping.n() != h.n() {
            return Err(Error::GroupingMismatch {
                grouping_terms: grouping.num_terms(),
                grouping_qubits: grouping.n(),
                hamiltonian_terms: h.num_terms(),
                hamiltonian_qubits: h.n(),
            });
        }
        let terms = h.terms();
        let groups = grouping
            .groups()
            .iter()
            .map(|g| {
                let distribution = state.basis_distribution(&g.basis)?;
                let members = g
                    .members
                    .iter()
                    .map(|&i| (terms[i].coefficient, terms[i].string))
                    .collect();
                Ok(GroupCache {
                    distribution,
                    members,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GroupedEstimator {
            offset: h.offset(),
            groups,
        })
    }
}

impl EnergySampler for GroupedEstimator {
    fn rounds_per_sample(&self) -> u64 {
        self.groups.len() as u64
    }

    fn sample(&self, rng: &mut dyn RngCore) -> EnergySample {
        let mut value = self.offset;
        for group in &self.groups {
            let outcome = group.distribution.sample(rng);
            for (coefficient, string) in &group.members {
                value += coefficient * f64::from(string.eval_outcome(&outcome));
            }
        }
        EnergySample {
            value,
            rounds_cost: self.groups.len() as u64,
        }
    }
}

struct TermCache {
    sign: f64,
    string: PauliString,
    distribution: BasisDistribution,
}

/// Measures a single term per sample, drawn with probability proportional to
/// its coefficient magnitude, and rescales by the one-norm.
///
/// Every sample lands exactly at `offset +/- one_norm`, the widest spread an
/// unbiased one-round estimator of this form can have.
pub struct SingleShotEstimator {
    offset: f64,
    one_norm: f64,
    cumulative: Vec<f64>,
    terms: Vec<TermCache>,
}

impl SingleShotEstimator {
    pub fn new(state: &StateVector, h: &Hamiltonian) -> Result<Self> {
        let one_norm = h.one_norm();
        let mut cumulative = Vec::with_capacity(h.num_terms());
        let mut acc = 0.0;
        let terms = h
            .terms()
            .iter()
            .map(|t| {
                acc += t.coefficient.abs() / one_norm;
                cumulative.push(acc);
                let mut basis = MeasurementBasis::from_string(&t.string);
                basis.finalize();
                let distribution = state.basis_distribution(&basis)?;
                Ok(TermCache {
                    sign: t.coefficient.signum(),
                    string: t.string,
                    distribution,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SingleShotEstimator {
            offset: h.offset(),
            one_norm,
            cumulative,
            terms,
        })
    }
}

impl EnergySampler for SingleShotEstimator {
    fn rounds_per_sample(&self) -> u64 {
        1
    }

    fn sample(&self, rng: &mut dyn RngCore) -> EnergySample {
        let u: f64 = rng.gen();
        let k = self
            .cumulative
            .partition_point(|&c| c <= u)
            .min(self.terms.len() - 1);
        let term = &self.terms[k];
        let outcome = term.distribution.sample(rng);
        let o = f64::from(term.string.eval_outcome(&outcome));
        EnergySample {
            value: self.offset + term.sign * o * self.one_norm,
            rounds_cost: 1,
        }
    }
}

/// Measurement rounds guaranteeing `|mean - E| <= epsilon` with probability
/// at least `1 - delta` for samples of range twice the one-norm:
/// `ceil((2 / epsilon^2) * one_norm^2 * ln(2 / delta))`.
pub fn hoeffding_rounds(h: &Hamiltonian, epsilon: f64, delta: f64) -> Result<u64> {
    hoeffding_rounds_for_norm(h.one_norm(), epsilon, delta)
}

/// [`hoeffding_rounds`] for a bare coefficient one-norm.
pub fn hoeffding_rounds_for_norm(one_norm: f64, epsilon: f64, delta: f64) -> Result<u64> {
    if one_norm <= 0.0 || !one_norm.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "one-norm must be positive and finite, got {one_norm}"
        )));
    }
    if epsilon <= 0.0 || !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    if delta.is_nan() || delta <= 0.0 || delta >= 0.5 {
        return Err(Error::InvalidParameter(format!(
            "delta must lie strictly between 0 and 1/2, got {delta}"
        )));
    }
    let bound = (2.0 / (epsilon * epsilon)) * one_norm * one_norm * (2.0 / delta).ln();
    if !bound.is_finite() || bound >= u64::MAX as f64 {
        return Err(Error::InvalidParameter(format!(
            "Hoeffding bound overflows at epsilon {epsilon}"
        )));
    }
    Ok((bound.ceil() as u64).max(1))
}
