//! Dense state-vector simulation of Pauli measurements.
//!
//! Amplitude index bit `j` is qubit `j`, matching the mask convention in
//! [`crate::pauli`]. Measuring a finalized basis rotates each qubit into the
//! computational frame (H for X, H after S-dagger for Y, nothing for Z) and
//! reads bit `j` as +1 for 0 and -1 for 1, so the expected outcome sign equals
//! the expectation of the basis letter on that qubit.
//!
//! A Pauli string acts on a basis state as
//! `P |b> = i^{n_Y} (-1)^{b.z_mask} |b ^ x_mask>`,
//! which keeps every Hamiltonian application matrix-free.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::grouping::{Grouping, MeasurementBasis};
use crate::pauli::{Hamiltonian, Outcome, PauliLetter, PauliString};

/// Dense simulation cap: 2^16 amplitudes.
pub const MAX_SIM_QUBITS: usize = 16;

const NORM_TOL: f64 = 1e-10;
/// Ground-state residual tolerance, relative to the coefficient one-norm.
const RESIDUAL_RTOL: f64 = 1e-8;

/// i^k for k = 0..3.
const I_POW: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

/// A normalized pure state on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// The computational basis state whose bit `j` is qubit `j`'s value.
    pub fn computational(n: usize, index: u64) -> Self {
        assert!((1..=MAX_SIM_QUBITS).contains(&n), "qubit count {n} out of range");
        let dim = 1usize << n;
        assert!((index as usize) < dim, "basis index {index} out of range");
        let mut amps = vec![Complex64::ZERO; dim];
        amps[index as usize] = Complex64::ONE;
        StateVector { n, amps }
    }

    /// Wraps explicit amplitudes; they must already be normalized.
    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        assert!((1..=MAX_SIM_QUBITS).contains(&n), "qubit count {n} out of range");
        assert_eq!(amps.len(), 1usize << n, "amplitude count must be 2^n");
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        let deviation = (norm_sq.sqrt() - 1.0).abs();
        if deviation > NORM_TOL {
            return Err(Error::NotNormalized { deviation });
        }
        Ok(StateVector { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Exact expectation value of a Pauli string in this state.
    pub fn expectation(&self, p: &PauliString) -> f64 {
        assert_eq!(self.n, p.n(), "string acts on {} qubits, state has {}", p.n(), self.n);
        let x = p.x_mask() as usize;
        let z = p.z_mask();
        let y_phase = I_POW[((p.x_mask() & z).count_ones() % 4) as usize];
        let mut acc = Complex64::ZERO;
        for (b, amp) in self.amps.iter().enumerate() {
            let v = self.amps[b ^ x].conj() * amp;
            if (b as u64 & z).count_ones() & 1 == 1 {
                acc -= v;
            } else {
                acc += v;
            }
        }
        (acc * y_phase).re
    }

    /// Outcome distribution of measuring every qubit in the given basis.
    ///
    /// Rotates a copy of the state qubit-by-qubit into the computational
    /// frame and caches both probabilities and their prefix sums.
    pub fn basis_distribution(&self, basis: &MeasurementBasis) -> Result<BasisDistribution> {
        assert_eq!(self.n, basis.n(), "basis and state act on different qubit counts");
        if !basis.is_finalized() {
            return Err(Error::InvalidParameter(
                "measurement basis still has free slots".into(),
            ));
        }
        // H maps X eigenstates onto the computational basis; for Y the S^dag
        // then H composition does (H S^dag maps |+i> to |0>), giving
        // U^dag Z U = Y as pinned by the rotation tests.
        let h_gate = {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            [
                [Complex64::new(s, 0.0), Complex64::new(s, 0.0)],
                [Complex64::new(s, 0.0), Complex64::new(-s, 0.0)],
            ]
        };
        let hs_dag = {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            [
                [Complex64::new(s, 0.0), Complex64::new(0.0, -s)],
                [Complex64::new(s, 0.0), Complex64::new(0.0, s)],
            ]
        };
        let mut amps = self.amps.clone();
        for j in 0..self.n {
            match basis.letter(j) {
                PauliLetter::Z => {}
                PauliLetter::X => apply_single_qubit(&mut amps, j, &h_gate),
                PauliLetter::Y => apply_single_qubit(&mut amps, j, &hs_dag),
                PauliLetter::I => unreachable!("finalized basis has no free slot"),
            }
        }
        let probabilities: Vec<f64> = amps.iter().map(|a| a.norm_sqr()).collect();
        let mut cumulative = Vec::with_capacity(probabilities.len());
        let mut total = 0.0;
        for &p in &probabilities {
            total += p;
            cumulative.push(total);
        }
        let deviation = (total - 1.0).abs();
        if deviation > NORM_TOL {
            return Err(Error::NotNormalized { deviation });
        }
        Ok(BasisDistribution {
            n: self.n,
            probabilities,
            cumulative,
        })
    }
}

/// Cached outcome distribution for one (state, basis) pair.
#[derive(Debug, Clone)]
pub struct BasisDistribution {
    n: usize,
    probabilities: Vec<f64>,
    cumulative: Vec<f64>,
}

impl BasisDistribution {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Probability of each bit-string outcome, indexed like amplitudes.
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Draws one outcome by inverse-CDF binary search over the prefix sums.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Outcome {
        let u: f64 = rng.gen();
        let idx = self
            .cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1);
        Outcome::new(self.n, idx as u64)
    }
}

fn apply_single_qubit(amps: &mut [Complex64], j: usize, m: &[[Complex64; 2]; 2]) {
    let bit = 1usize << j;
    for b in 0..amps.len() {
        if b & bit == 0 {
            let a0 = amps[b];
            let a1 = amps[b | bit];
            amps[b] = m[0][0] * a0 + m[0][1] * a1;
            amps[b | bit] = m[1][0] * a0 + m[1][1] * a1;
        }
    }
}

/// Applies the non-identity part of `h` to `v`, term by term.
fn apply_terms(h: &Hamiltonian, v: &[Complex64], out: &mut [Complex64]) {
    out.fill(Complex64::ZERO);
    for t in h.terms() {
        let x = t.string.x_mask() as usize;
        let z = t.string.z_mask();
        let phase = I_POW[((t.string.x_mask() & z).count_ones() % 4) as usize] * t.coefficient;
        for (b, amp) in v.iter().enumerate() {
            let w = phase * amp;
            if (b as u64 & z).count_ones() & 1 == 1 {
                out[b ^ x] -= w;
            } else {
                out[b ^ x] += w;
            }
        }
    }
}

/// Exact energy `offset + <state|H|state>`.
pub fn hamiltonian_expectation(state: &StateVector, h: &Hamiltonian) -> f64 {
    assert_eq!(state.n(), h.n(), "state and Hamiltonian qubit counts differ");
    h.offset()
        + h.terms()
            .iter()
            .map(|t| t.coefficient * state.expectation(&t.string))
            .sum::<f64>()
}

fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Deterministic pseudo-random start vector so repeated runs agree bit-wise.
fn seeded_vector(dim: usize, seed: u64) -> Vec<Complex64> {
    let mut state = seed;
    let mut next = move || {
        // splitmix64: documented finalizer, identical on every platform
        state = state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    };
    let mut unit = move || (next() >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
    (0..dim).map(|_| Complex64::new(unit(), unit())).collect()
}

/// Finds the minimal eigenvalue of `h` (offset included) and an eigenvector,
/// using matrix-free Lanczos iteration with full reorthogonalization.
///
/// Accepts a pair only after its true residual `||H v - E v||` drops below
/// 1e-8 times the coefficient one-norm. Errors when `n > 16` or when the
/// iteration budget `10 * 2^(n/2) + 200` runs out first.
pub fn ground_state(h: &Hamiltonian) -> Result<(f64, StateVector)> {
    let n = h.n();
    if n > MAX_SIM_QUBITS {
        return Err(Error::TooManyQubits {
            n,
            max: MAX_SIM_QUBITS,
        });
    }
    let dim = 1usize << n;
    let budget = 10 * (1usize << (n / 2)) + 200;
    let tol = RESIDUAL_RTOL * h.one_norm();

    let mut q0 = seeded_vector(dim, 0x5EED_1A2B_3C4D_5E6F);
    let nrm = norm(&q0);
    q0.iter_mut().for_each(|a| *a /= nrm);

    let mut qs: Vec<Vec<Complex64>> = vec![q0];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![Complex64::ZERO; dim];
    let mut last_residual = f64::INFINITY;
    let mut restart_seed = 1u64;

    for _ in 0..budget {
        let q = qs.last().expect("basis never empty");
        apply_terms(h, q, &mut w);
        let alpha = cdot(q, &w).re;
        alphas.push(alpha);
        // Full reorthogonalization, twice, keeps the basis orthonormal even
        // after many iterations; plain three-term recurrence loses it.
        for _ in 0..2 {
            for qi in &qs {
                let c = cdot(qi, &w);
                w.iter_mut().zip(qi).for_each(|(wi, &v)| *wi -= c * v);
            }
        }
        let beta = norm(&w);
        let m = alphas.len();

        let (theta, s) = min_ritz_pair(&alphas, &betas);
        let bound = beta * s[m - 1].abs();
        if bound <= tol || m == dim || beta <= tol * 1e-3 {
            let mut y = vec![Complex64::ZERO; dim];
            for (si, qi) in s.iter().zip(&qs) {
                y.iter_mut().zip(qi).for_each(|(yi, &v)| *yi += *si * v);
            }
            let ny = norm(&y);
            y.iter_mut().for_each(|a| *a /= ny);
            let mut hy = vec![Complex64::ZERO; dim];
            apply_terms(h, &y, &mut hy);
            let residual = hy
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - theta * b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            last_residual = residual;
            if residual <= tol {
                let state = StateVector {
                    n,
                    amps: y,
                };
                return Ok((theta + h.offset(), state));
            }
            if m == dim {
                break;
            }
        }
        if qs.len() == dim {
            break;
        }
        if beta <= tol * 1e-3 {
            // The Krylov space closed on an invariant subspace that may miss
            // the ground state; continue from a fresh direction.
            let mut fresh = seeded_vector(dim, 0xD1CE_0000 ^ restart_seed);
            restart_seed = restart_seed.wrapping_add(1);
            for _ in 0..2 {
                for qi in &qs {
                    let c = cdot(qi, &fresh);
                    fresh.iter_mut().zip(qi).for_each(|(fi, &v)| *fi -= c * v);
                }
            }
            let fn_norm = norm(&fresh);
            if fn_norm < 1e-12 {
                break;
            }
            fresh.iter_mut().for_each(|a| *a /= fn_norm);
            betas.push(0.0);
            qs.push(fresh);
        } else {
            let q_next: Vec<Complex64> = w.iter().map(|a| a / beta).collect();
            betas.push(beta);
            qs.push(q_next);
        }
    }
    Err(Error::NoConvergence {
        iterations: alphas.len(),
        residual: last_residual,
    })
}

/// Minimal eigenpair of the real symmetric tridiagonal matrix built from the
/// Lanczos coefficients.
fn min_ritz_pair(alphas: &[f64], betas: &[f64]) -> (f64, Vec<f64>) {
    let m = alphas.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for (i, &a) in alphas.iter().enumerate() {
        t[(i, i)] = a;
    }
    for (i, &b) in betas.iter().enumerate() {
        t[(i, i + 1)] = b;
        t[(i + 1, i)] = b;
    }
    let eig = t.symmetric_eigen();
    let mut min_idx = 0;
    for i in 1..m {
        if eig.eigenvalues[i] < eig.eigenvalues[min_idx] {
            min_idx = i;
        }
    }
    (
        eig.eigenvalues[min_idx],
        eig.eigenvectors.column(min_idx).iter().copied().collect(),
    )
}

/// Exact variance of one grouped energy sample: groups are drawn
/// independently, and within a group the covariance of two member outcomes is
/// the expectation of their letter-wise product minus the product of their
/// expectations.
///
/// # Panics
/// When the grouping was not built from this Hamiltonian or the qubit counts
/// disagree.
pub fn exact_estimator_variance(state: &StateVector, h: &Hamiltonian, grouping: &Grouping) -> f64 {
    assert_eq!(
        grouping.num_terms(),
        h.num_terms(),
        "grouping partitions {} terms, Hamiltonian has {}",
        grouping.num_terms(),
        h.num_terms()
    );
    assert_eq!(grouping.n(), h.n(), "grouping and Hamiltonian qubit counts differ");
    assert_eq!(state.n(), h.n(), "state and Hamiltonian qubit counts differ");

    let terms = h.terms();
    let means: Vec<f64> = terms.iter().map(|t| state.expectation(&t.string)).collect();
    let mut var = 0.0;
    for group in grouping.groups() {
        for (pos, &i) in group.members.iter().enumerate() {
            for &k in &group.members[pos..] {
                let product = terms[i].string.qwc_product(&terms[k].string);
                let cov = state.expectation(&product) - means[i] * means[k];
                let w = terms[i].coefficient * terms[k].coefficient * cov;
                var += if i == k { w } else { 2.0 * w };
            }
        }
    }
    var.max(0.0)
}
