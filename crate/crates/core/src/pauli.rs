//! Pauli-string algebra, the Jordan-Wigner map, and qubit-wise-commuting
//! grouping.
//!
//! A Pauli string is stored as two bit masks: bit `k` of `x` is set for X or
//! Y on qubit `k`, bit `k` of `z` for Z or Y. Qubit 0 is the least
//! significant bit and the leftmost letter in text patterns.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt::{self, Write as _};

use num_complex::Complex64;

use crate::fermion::{FermionOperator, LadderKind};
use crate::format::{complex_repr, parse_complex};
use crate::{Error, Result};

/// Terms whose coefficient magnitude falls below this are dropped by
/// [`canonicalize`].
pub const COEFFICIENT_TOLERANCE: f64 = 1e-12;

pub const MAX_QUBITS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn letter(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PauliString {
    pub x: u64,
    pub z: u64,
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString { x: 0, z: 0 };

    pub fn single(qubit: usize, p: Pauli) -> Self {
        assert!(qubit < MAX_QUBITS, "qubit {qubit} exceeds the {MAX_QUBITS}-qubit mask");
        let bit = 1u64 << qubit;
        match p {
            Pauli::X => Self { x: bit, z: 0 },
            Pauli::Y => Self { x: bit, z: bit },
            Pauli::Z => Self { x: 0, z: bit },
        }
    }

    pub fn from_letters(letters: &[(usize, Pauli)]) -> Self {
        letters
            .iter()
            .fold(Self::IDENTITY, |acc, &(q, p)| {
                let s = Self::single(q, p);
                Self { x: acc.x | s.x, z: acc.z | s.z }
            })
    }

    pub fn get(&self, qubit: usize) -> Option<Pauli> {
        let bit = 1u64 << qubit;
        match (self.x & bit != 0, self.z & bit != 0) {
            (false, false) => None,
            (true, false) => Some(Pauli::X),
            (true, true) => Some(Pauli::Y),
            (false, true) => Some(Pauli::Z),
        }
    }

    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn weight(&self) -> u32 {
        self.support().count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.support() == 0
    }

    /// Non-identity letters in ascending qubit order.
    pub fn letters(&self) -> impl Iterator<Item = (usize, Pauli)> + '_ {
        let support = self.support();
        (0..MAX_QUBITS)
            .filter(move |q| support >> q & 1 == 1)
            .map(move |q| (q, self.get(q).expect("in support")))
    }

    fn highest_qubit(&self) -> Option<usize> {
        let s = self.support();
        (s != 0).then(|| 63 - s.leading_zeros() as usize)
    }

    /// `P |i⟩ = phase · |j⟩` for computational basis index `i`.
    #[inline]
    pub fn apply_to_basis(&self, i: usize) -> (usize, Complex64) {
        let n_y = (self.x & self.z).count_ones();
        let sign_flips = ((i as u64) & self.z).count_ones();
        let phase = I_POWERS[((n_y + 2 * sign_flips) % 4) as usize];
        (i ^ self.x as usize, phase)
    }

    /// Product `self · other` as `(i^k, string)`, with `k` in `0..4`.
    pub fn multiply(&self, other: &PauliString) -> (u32, PauliString) {
        let mut k = 0u32;
        let overlap = self.support() & other.support();
        let mut bits = overlap;
        while bits != 0 {
            let q = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let a = self.get(q).expect("in support");
            let b = other.get(q).expect("in support");
            k += match (a, b) {
                (Pauli::X, Pauli::Y) | (Pauli::Y, Pauli::Z) | (Pauli::Z, Pauli::X) => 1,
                (Pauli::Y, Pauli::X) | (Pauli::Z, Pauli::Y) | (Pauli::X, Pauli::Z) => 3,
                _ => 0,
            };
        }
        (
            k % 4,
            PauliString {
                x: self.x ^ other.x,
                z: self.z ^ other.z,
            },
        )
    }

    /// True when the two strings commute qubit-wise (letters agree or one
    /// is identity on every qubit).
    pub fn qubit_wise_commutes(&self, other: &PauliString) -> bool {
        let both = self.support() & other.support();
        (self.x ^ other.x) & both == 0 && (self.z ^ other.z) & both == 0
    }

    pub fn commutes(&self, other: &PauliString) -> bool {
        let anti = (self.x & other.z).count_ones() + (self.z & other.x).count_ones();
        anti.is_multiple_of(2)
    }

    /// Letter pattern over `n` qubits, qubit 0 first (`IXYZ`).
    pub fn pattern(&self, n: usize) -> String {
        (0..n).map(|q| self.get(q).map_or('I', Pauli::letter)).collect()
    }

    pub fn parse_pattern(pattern: &str) -> Option<Self> {
        let mut s = Self::IDENTITY;
        for (q, ch) in pattern.chars().enumerate() {
            if q >= MAX_QUBITS {
                return None;
            }
            let p = match ch {
                'I' => continue,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                _ => return None,
            };
            let one = Self::single(q, p);
            s.x |= one.x;
            s.z |= one.z;
        }
        Some(s)
    }

    fn code(&self, q: usize) -> u8 {
        match self.get(q) {
            None => 0,
            Some(Pauli::X) => 1,
            Some(Pauli::Y) => 2,
            Some(Pauli::Z) => 3,
        }
    }

    /// Canonical order: weight, then lexicographic pattern (qubit 0 first,
    /// `I < X < Y < Z`).
    pub fn canonical_cmp(&self, other: &PauliString) -> Ordering {
        self.weight().cmp(&other.weight()).then_with(|| {
            let top = self.highest_qubit().max(other.highest_qubit()).map_or(0, |h| h + 1);
            (0..top)
                .map(|q| self.code(q).cmp(&other.code(q)))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
    }
}

const I_POWERS: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliTerm {
    pub coefficient: Complex64,
    pub string: PauliString,
}

impl PauliTerm {
    pub fn new(coefficient: impl Into<Complex64>, string: PauliString) -> Self {
        Self {
            coefficient: coefficient.into(),
            string,
        }
    }

    pub fn identity(coefficient: impl Into<Complex64>) -> Self {
        Self::new(coefficient, PauliString::IDENTITY)
    }
}

/// Product of two terms with the accumulated phase folded into the coefficient.
pub fn pauli_multiply(a: &PauliTerm, b: &PauliTerm) -> PauliTerm {
    let (k, string) = a.string.multiply(&b.string);
    PauliTerm {
        coefficient: a.coefficient * b.coefficient * I_POWERS[k as usize],
        string,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    pub n_qubits: usize,
    pub terms: Vec<PauliTerm>,
}

impl PauliSum {
    pub fn new(n_qubits: usize) -> Self {
        assert!(n_qubits <= MAX_QUBITS, "at most {MAX_QUBITS} qubits");
        Self {
            n_qubits,
            terms: Vec::new(),
        }
    }

    pub fn from_terms(n_qubits: usize, terms: Vec<PauliTerm>) -> Self {
        let mut s = Self::new(n_qubits);
        s.terms = terms;
        s
    }

    /// Coefficient of the identity string (0 when absent).
    pub fn identity_coefficient(&self) -> Complex64 {
        self.terms
            .iter()
            .filter(|t| t.string.is_identity())
            .map(|t| t.coefficient)
            .sum()
    }

    /// True if no term acts non-trivially on any qubit.
    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|t| t.string.is_identity())
    }

    pub fn max_imaginary(&self) -> f64 {
        self.terms.iter().fold(0.0, |m, t| m.max(t.coefficient.im.abs()))
    }

    pub fn is_hermitian(&self) -> bool {
        self.max_imaginary() <= COEFFICIENT_TOLERANCE
    }

    /// Sum of two operators, canonicalized.
    pub fn add(&self, other: &PauliSum) -> PauliSum {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        canonicalize(&PauliSum::from_terms(self.n_qubits.max(other.n_qubits), terms))
    }

    /// Operator product, canonicalized.
    pub fn multiply(&self, other: &PauliSum) -> PauliSum {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(pauli_multiply(a, b));
            }
        }
        canonicalize(&PauliSum::from_terms(self.n_qubits.max(other.n_qubits), terms))
    }

    /// `<coeff> <pattern>` per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in &self.terms {
            let _ = writeln!(out, "{} {}", complex_repr(t.coefficient), t.string.pattern(self.n_qubits));
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<PauliSum> {
        let mut terms = Vec::new();
        let mut n_qubits = 0;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (coef, pattern) = line
                .rsplit_once(char::is_whitespace)
                .ok_or_else(|| Error::parse(i + 1, format!("expected `<coeff> <pattern>`, got `{line}`")))?;
            let coefficient = parse_complex(coef)
                .ok_or_else(|| Error::parse(i + 1, format!("malformed coefficient `{coef}`")))?;
            let string = PauliString::parse_pattern(pattern)
                .ok_or_else(|| Error::parse(i + 1, format!("malformed Pauli pattern `{pattern}`")))?;
            if n_qubits != 0 && pattern.len() != n_qubits {
                return Err(Error::parse(i + 1, format!("pattern length {} differs from {n_qubits}", pattern.len())));
            }
            n_qubits = pattern.len();
            terms.push(PauliTerm { coefficient, string });
        }
        Ok(PauliSum::from_terms(n_qubits, terms))
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Merges equal strings, drops coefficients below [`COEFFICIENT_TOLERANCE`],
/// and sorts into canonical order.
pub fn canonicalize(s: &PauliSum) -> PauliSum {
    let mut merged: HashMap<PauliString, Complex64> = HashMap::with_capacity(s.terms.len());
    let mut first_seen: Vec<PauliString> = Vec::new();
    for t in &s.terms {
        merged
            .entry(t.string)
            .and_modify(|c| *c += t.coefficient)
            .or_insert_with(|| {
                first_seen.push(t.string);
                t.coefficient
            });
    }
    let mut terms: Vec<PauliTerm> = first_seen
        .into_iter()
        .map(|string| PauliTerm {
            coefficient: merged[&string],
            string,
        })
        .filter(|t| t.coefficient.norm() >= COEFFICIENT_TOLERANCE)
        .collect();
    terms.sort_by(|a, b| a.string.canonical_cmp(&b.string));
    PauliSum::from_terms(s.n_qubits, terms)
}

/// `(X_p ∓ iY_p)/2 ⊗ Z_{p-1} … Z_0` for a creation (−) or annihilation (+).
fn ladder_image(mode: usize, kind: LadderKind) -> [PauliTerm; 2] {
    let z_chain = if mode == 0 { 0 } else { (1u64 << mode) - 1 };
    let bit = 1u64 << mode;
    let x = PauliString { x: bit, z: z_chain };
    let y = PauliString { x: bit, z: z_chain | bit };
    let y_coef = match kind {
        LadderKind::Creation => Complex64::new(0.0, -0.5),
        LadderKind::Annihilation => Complex64::new(0.0, 0.5),
    };
    [PauliTerm::new(0.5, x), PauliTerm::new(y_coef, y)]
}

/// Jordan-Wigner image of `op` on `op.n_modes` qubits, canonicalized.
///
/// When `op` is Hermitian the residual imaginary parts are removed.
pub fn jordan_wigner(op: &FermionOperator) -> PauliSum {
    assert!(op.n_modes <= MAX_QUBITS, "at most {MAX_QUBITS} modes");
    let mut acc: HashMap<PauliString, Complex64> = HashMap::new();
    if op.constant != 0.0 {
        acc.insert(PauliString::IDENTITY, Complex64::new(op.constant, 0.0));
    }
    let mut partial: Vec<PauliTerm> = Vec::with_capacity(16);
    let mut next: Vec<PauliTerm> = Vec::with_capacity(16);
    for term in &op.terms {
        partial.clear();
        partial.push(PauliTerm::identity(term.coefficient));
        for f in &term.factors {
            next.clear();
            let image = ladder_image(f.mode, f.kind);
            for p in &partial {
                for q in &image {
                    next.push(pauli_multiply(p, q));
                }
            }
            std::mem::swap(&mut partial, &mut next);
        }
        for t in &partial {
            *acc.entry(t.string).or_default() += t.coefficient;
        }
    }
    let terms = acc
        .into_iter()
        .map(|(string, coefficient)| PauliTerm { coefficient, string })
        .collect();
    let mut sum = canonicalize(&PauliSum::from_terms(op.n_modes, terms));
    if op.is_hermitian() {
        let scale = sum.terms.iter().fold(1.0_f64, |m, t| m.max(t.coefficient.norm()));
        debug_assert!(
            sum.max_imaginary() <= 1e-10 * scale,
            "Hermitian operator mapped to imaginary residual {:e}",
            sum.max_imaginary()
        );
        for t in &mut sum.terms {
            t.coefficient.im = 0.0;
        }
    }
    sum
}

/// Greedy first-fit partition into qubit-wise-commuting groups, in input order.
pub fn qwc_group(s: &PauliSum) -> Vec<Vec<PauliTerm>> {
    // each group keeps the merged measurement basis of its members
    let mut groups: Vec<(PauliString, Vec<PauliTerm>)> = Vec::new();
    for t in &s.terms {
        match groups.iter_mut().find(|(basis, _)| basis.qubit_wise_commutes(&t.string)) {
            Some((basis, members)) => {
                basis.x |= t.string.x;
                basis.z |= t.string.z;
                members.push(*t);
            }
            None => groups.push((t.string, vec![*t])),
        }
    }
    groups.into_iter().map(|(_, members)| members).collect()
}
