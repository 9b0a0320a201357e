//! Pauli strings and Hamiltonians in a two-mask representation.
//!
//! A string over {I, X, Y, Z} is stored as two bitmasks: bit `j` of `x_mask`
//! (resp. `z_mask`) is set when the letter on qubit `j` has an X (resp. Z)
//! component, so Y sets both. Qubit 0 is the leftmost letter in text form and
//! the least significant mask bit; measurement outcomes and state-vector
//! amplitudes use the same bit order throughout the crate. The encoding makes
//! qubit-wise commutation tests and outcome evaluation single word operations.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Widest string the two `u64` masks can hold.
pub const MAX_QUBITS: usize = 64;

/// One single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PauliLetter {
    I,
    X,
    Y,
    Z,
}

impl PauliLetter {
    /// Letter for an (x, z) component pair.
    pub fn from_components(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => PauliLetter::I,
            (true, false) => PauliLetter::X,
            (true, true) => PauliLetter::Y,
            (false, true) => PauliLetter::Z,
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(PauliLetter::I),
            'X' => Some(PauliLetter::X),
            'Y' => Some(PauliLetter::Y),
            'Z' => Some(PauliLetter::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            PauliLetter::I => 'I',
            PauliLetter::X => 'X',
            PauliLetter::Y => 'Y',
            PauliLetter::Z => 'Z',
        }
    }

    pub fn is_identity(self) -> bool {
        self == PauliLetter::I
    }
}

/// A tensor product of Pauli letters on `n` qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x_mask: u64,
    z_mask: u64,
}

impl PauliString {
    /// The all-identity string on `n` qubits.
    pub fn identity(n: usize) -> Self {
        assert!((1..=MAX_QUBITS).contains(&n), "qubit count {n} out of range");
        PauliString {
            n,
            x_mask: 0,
            z_mask: 0,
        }
    }

    pub(crate) fn from_masks(n: usize, x_mask: u64, z_mask: u64) -> Self {
        debug_assert!((1..=MAX_QUBITS).contains(&n));
        debug_assert_eq!(x_mask & !mask_n(n), 0);
        debug_assert_eq!(z_mask & !mask_n(n), 0);
        PauliString { n, x_mask, z_mask }
    }

    pub fn from_letters(letters: &[PauliLetter]) -> Self {
        assert!(
            !letters.is_empty() && letters.len() <= MAX_QUBITS,
            "qubit count {} out of range",
            letters.len()
        );
        let mut x_mask = 0u64;
        let mut z_mask = 0u64;
        for (j, letter) in letters.iter().enumerate() {
            match letter {
                PauliLetter::I => {}
                PauliLetter::X => x_mask |= 1 << j,
                PauliLetter::Y => {
                    x_mask |= 1 << j;
                    z_mask |= 1 << j;
                }
                PauliLetter::Z => z_mask |= 1 << j,
            }
        }
        PauliString {
            n: letters.len(),
            x_mask,
            z_mask,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_mask(&self) -> u64 {
        self.x_mask
    }

    pub fn z_mask(&self) -> u64 {
        self.z_mask
    }

    /// Mask of qubits carrying a non-identity letter.
    pub fn support_mask(&self) -> u64 {
        self.x_mask | self.z_mask
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> u32 {
        self.support_mask().count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.support_mask() == 0
    }

    pub fn letter(&self, j: usize) -> PauliLetter {
        assert!(j < self.n, "qubit {j} out of range for {} qubits", self.n);
        PauliLetter::from_components(self.x_mask >> j & 1 == 1, self.z_mask >> j & 1 == 1)
    }

    pub fn letters(&self) -> impl Iterator<Item = PauliLetter> + '_ {
        (0..self.n).map(|j| self.letter(j))
    }

    /// Whether the two strings commute qubit-wise: on every qubit the letters
    /// are equal or at least one is the identity.
    ///
    /// # Panics
    /// When the strings act on different numbers of qubits.
    pub fn qwc(&self, other: &Self) -> bool {
        assert_eq!(
            self.n, other.n,
            "cannot compare strings on {} and {} qubits",
            self.n, other.n
        );
        let differ = (self.x_mask ^ other.x_mask) | (self.z_mask ^ other.z_mask);
        self.support_mask() & other.support_mask() & differ == 0
    }

    /// Letter-wise product of two qubit-wise commuting strings: equal letters
    /// cancel to I, a letter against I survives. No phase arises because the
    /// inputs never mix distinct non-identity letters on one qubit.
    ///
    /// # Panics
    /// When the strings act on different numbers of qubits or do not commute
    /// qubit-wise.
    pub fn qwc_product(&self, other: &Self) -> Self {
        assert!(
            self.qwc(other),
            "qwc_product requires qubit-wise commuting inputs ({self} vs {other})"
        );
        PauliString {
            n: self.n,
            x_mask: self.x_mask ^ other.x_mask,
            z_mask: self.z_mask ^ other.z_mask,
        }
    }

    /// Value of the observable given per-qubit readouts: the product of the
    /// outcome signs over the support. Identity strings evaluate to +1.
    ///
    /// # Panics
    /// When the outcome covers a different number of qubits.
    pub fn eval_outcome(&self, outcome: &Outcome) -> i8 {
        assert_eq!(
            self.n,
            outcome.n,
            "outcome covers {} qubits, string needs {}",
            outcome.n,
            self.n
        );
        if (self.support_mask() & outcome.bits).count_ones() & 1 == 0 {
            1
        } else {
            -1
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for letter in self.letters() {
            write!(f, "{}", letter.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() || s.len() > MAX_QUBITS {
            return Err(Error::Parse {
                line: 0,
                message: format!("string must have 1..={MAX_QUBITS} letters, got {}", s.len()),
            });
        }
        let mut letters = Vec::with_capacity(s.len());
        for c in s.chars() {
            match PauliLetter::from_char(c) {
                Some(l) => letters.push(l),
                None => {
                    return Err(Error::Parse {
                        line: 0,
                        message: format!("letter `{c}` is not one of I, X, Y, Z"),
                    })
                }
            }
        }
        Ok(PauliString::from_letters(&letters))
    }
}

/// One measured bit string. Bit `j` set means qubit `j` read out 1, which is
/// reported as the sign -1; a clear bit is 0, reported as +1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Outcome {
    n: usize,
    bits: u64,
}

impl Outcome {
    pub fn new(n: usize, bits: u64) -> Self {
        assert!((1..=MAX_QUBITS).contains(&n), "qubit count {n} out of range");
        assert_eq!(bits & !mask_n(n), 0, "outcome bits beyond qubit {n}");
        Outcome { n, bits }
    }

    /// Builds an outcome from per-qubit signs in {+1, -1}, qubit 0 first.
    pub fn from_signs(signs: &[i8]) -> Self {
        let mut bits = 0u64;
        for (j, &s) in signs.iter().enumerate() {
            match s {
                1 => {}
                -1 => bits |= 1 << j,
                _ => panic!("outcome sign must be +1 or -1, got {s}"),
            }
        }
        Outcome::new(signs.len(), bits)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn sign(&self, j: usize) -> i8 {
        assert!(j < self.n, "qubit {j} out of range for {} qubits", self.n);
        if self.bits >> j & 1 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn signs(&self) -> Vec<i8> {
        (0..self.n).map(|j| self.sign(j)).collect()
    }
}

/// A real coefficient attached to a Pauli string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coefficient: f64,
    pub string: PauliString,
}

/// A Pauli-decomposed Hamiltonian: distinct non-identity terms plus a real
/// energy offset collected from identity lines.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    n: usize,
    terms: Vec<Term>,
    offset: f64,
}

impl Hamiltonian {
    /// Parses the term-per-line text format: `<coefficient> <letters>`, with
    /// `#` starting a comment and blank lines ignored. Duplicate strings merge
    /// by summing coefficients, exact-zero coefficients are dropped, and
    /// identity terms accumulate into the offset.
    pub fn parse(text: &str) -> Result<Self> {
        let mut n: Option<usize> = None;
        let mut offset = 0.0f64;
        let mut terms: Vec<Term> = Vec::new();
        let mut index: HashMap<(u64, u64), usize> = HashMap::new();

        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let content = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let mut tokens = content.split_whitespace();
            let (coeff_tok, letters_tok) = match (tokens.next(), tokens.next()) {
                (None, _) => continue,
                (Some(c), Some(l)) => (c, l),
                (Some(_), None) => {
                    return Err(Error::Parse {
                        line,
                        message: "expected `<coefficient> <letters>`".into(),
                    })
                }
            };
            if let Some(extra) = tokens.next() {
                return Err(Error::Parse {
                    line,
                    message: format!("unexpected trailing token `{extra}`"),
                });
            }
            let coefficient: f64 = coeff_tok.parse().map_err(|_| Error::Parse {
                line,
                message: format!("unreadable coefficient `{coeff_tok}`"),
            })?;
            if !coefficient.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("coefficient `{coeff_tok}` is not finite"),
                });
            }
            let string: PauliString = letters_tok.parse().map_err(|e| match e {
                Error::Parse { message, .. } => Error::Parse { line, message },
                other => other,
            })?;
            match n {
                None => n = Some(string.n()),
                Some(expected) if expected != string.n() => {
                    return Err(Error::LengthMismatch {
                        line,
                        expected,
                        found: string.n(),
                    })
                }
                Some(_) => {}
            }
            if string.is_identity() {
                offset += coefficient;
            } else {
                let key = (string.x_mask(), string.z_mask());
                match index.get(&key) {
                    Some(&i) => terms[i].coefficient += coefficient,
                    None => {
                        index.insert(key, terms.len());
                        terms.push(Term {
                            coefficient,
                            string,
                        });
                    }
                }
            }
        }

        let n = n.ok_or(Error::EmptyHamiltonian)?;
        terms.retain(|t| t.coefficient != 0.0);
        if terms.is_empty() {
            return Err(Error::EmptyHamiltonian);
        }
        Ok(Hamiltonian { n, terms, offset })
    }

    /// Builds a Hamiltonian from in-memory terms with the same merge, drop,
    /// and identity-offset rules as [`Hamiltonian::parse`].
    ///
    /// # Panics
    /// When term strings act on different numbers of qubits.
    pub fn from_terms(terms: &[(f64, PauliString)], offset: f64) -> Result<Self> {
        let mut text = String::new();
        for (c, s) in terms {
            assert_eq!(
                s.n(),
                terms[0].1.n(),
                "all terms must act on the same qubits"
            );
            text.push_str(&format!("{c} {s}\n"));
        }
        if offset != 0.0 {
            let n = terms.first().map(|(_, s)| s.n()).unwrap_or(1);
            text.push_str(&format!("{offset} {}\n", PauliString::identity(n)));
        }
        Self::parse(&text)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Energy contribution of identity lines.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Sum of |coefficient| over the non-identity terms. The offset never
    /// counts: it shifts every estimate identically.
    pub fn one_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.abs()).sum()
    }

    /// Serializes back to the text format. Coefficients print in shortest
    /// round-trip form, so parse(to_text(h)) reproduces `h` exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if self.offset != 0.0 {
            out.push_str(&format!(
                "{} {}\n",
                self.offset,
                PauliString::identity(self.n)
            ));
        }
        for t in &self.terms {
            out.push_str(&format!("{} {}\n", t.coefficient, t.string));
        }
        out
    }
}

fn mask_n(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}
