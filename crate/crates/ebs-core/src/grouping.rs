//! Qubit-wise commuting measurement groups.
//!
//! Terms that agree letter-for-letter wherever both are non-identity can share
//! one measurement setting. `greedy_group` packs terms first-fit in decreasing
//! |coefficient| order, ties broken by input position, so the result is a
//! deterministic function of the Hamiltonian.

use std::fmt;

use crate::pauli::{Hamiltonian, PauliLetter, PauliString};

/// Per-qubit measurement assignment. While a group is being built, qubits not
/// yet claimed by any member are free (shown as the identity letter); a
/// finalized basis has a concrete letter everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasurementBasis {
    n: usize,
    x_mask: u64,
    z_mask: u64,
}

impl MeasurementBasis {
    /// A basis with every slot free.
    pub fn empty(n: usize) -> Self {
        PauliString::identity(n); // reuse its range check
        MeasurementBasis {
            n,
            x_mask: 0,
            z_mask: 0,
        }
    }

    /// Adopts the letters of a string; qubits in its identity positions stay
    /// free.
    pub fn from_string(p: &PauliString) -> Self {
        MeasurementBasis {
            n: p.n(),
            x_mask: p.x_mask(),
            z_mask: p.z_mask(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Assigned letter at qubit `j`; `I` encodes a still-free slot.
    pub fn letter(&self, j: usize) -> PauliLetter {
        self.as_string().letter(j)
    }

    /// No free slots remain.
    pub fn is_finalized(&self) -> bool {
        self.x_mask | self.z_mask == mask_n(self.n)
    }

    /// Whether every non-identity letter of `p` matches the assignment at
    /// that qubit. Free slots accept any letter, so on a finalized basis this
    /// is exact letter agreement over the support of `p`.
    pub fn compatible(&self, p: &PauliString) -> bool {
        assert_eq!(
            self.n,
            p.n(),
            "basis on {} qubits cannot test a string on {}",
            self.n,
            p.n()
        );
        let differ = (p.x_mask() ^ self.x_mask) | (p.z_mask() ^ self.z_mask);
        p.support_mask() & (self.x_mask | self.z_mask) & differ == 0
    }

    /// Claims the non-identity letters of `p` for their qubits.
    ///
    /// # Panics
    /// When `p` is not compatible with the current assignment.
    pub fn absorb(&mut self, p: &PauliString) {
        assert!(self.compatible(p), "cannot absorb incompatible string {p}");
        self.x_mask |= p.x_mask();
        self.z_mask |= p.z_mask();
    }

    /// Assigns Z to every free slot.
    pub fn finalize(&mut self) {
        let free = mask_n(self.n) & !(self.x_mask | self.z_mask);
        self.z_mask |= free;
    }

    /// The assignment viewed as a Pauli string (free slots read as identity).
    pub fn as_string(&self) -> PauliString {
        PauliString::from_masks(self.n, self.x_mask, self.z_mask)
    }
}

impl fmt::Display for MeasurementBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_string())
    }
}

/// One measurement group: indices into the Hamiltonian's term list plus the
/// finalized basis they are all compatible with.
#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    pub members: Vec<usize>,
    pub basis: MeasurementBasis,
}

/// A partition of all terms into qubit-wise commuting groups.
#[derive(Debug, Clone, PartialEq)]
pub struct Grouping {
    n: usize,
    num_terms: usize,
    groups: Vec<Group>,
}

impl Grouping {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of terms the grouping partitions.
    pub fn num_terms(&self) -> usize {
        self.num_terms
    }

    /// Number of measurement settings, i.e. rounds per grouped sample.
    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }
}

/// Greedily partitions the terms: visit them in decreasing |coefficient|
/// (ties by original index), put each into the first group whose partial
/// basis admits it, else open a new group. Free slots finalize to Z.
pub fn greedy_group(h: &Hamiltonian) -> Grouping {
    let terms = h.terms();
    let mut order: Vec<usize> = (0..terms.len()).collect();
    order.sort_by(|&a, &b| {
        terms[b]
            .coefficient
            .abs()
            .partial_cmp(&terms[a].coefficient.abs())
            .expect("coefficients are finite")
            .then(a.cmp(&b))
    });

    let mut groups: Vec<Group> = Vec::new();
    for idx in order {
        let string = &terms[idx].string;
        match groups.iter_mut().find(|g| g.basis.compatible(string)) {
            Some(group) => {
                group.basis.absorb(string);
                group.members.push(idx);
            }
            None => {
                let mut basis = MeasurementBasis::empty(h.n());
                basis.absorb(string);
                groups.push(Group {
                    members: vec![idx],
                    basis,
                });
            }
        }
    }
    for g in &mut groups {
        g.basis.finalize();
    }
    Grouping {
        n: h.n(),
        num_terms: terms.len(),
        groups,
    }
}

fn mask_n(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}
