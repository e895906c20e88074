//! Second-quantized electronic Hamiltonian over spin orbitals.
//!
//! Spin orbitals use blocked ordering: for `n` spatial orbitals, modes
//! `0..n` are α and modes `n..2n` are β, with mode `σn + p` holding spatial
//! orbital `p`.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::format::{complex_repr, float_repr, parse_complex};
use crate::integrals_io::MOIntegrals;
use crate::{Error, Result};

/// Coefficients smaller than this are not emitted by the builder.
pub const DROP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LadderKind {
    Creation,
    Annihilation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ladder {
    pub mode: usize,
    pub kind: LadderKind,
}

impl Ladder {
    pub fn create(mode: usize) -> Self {
        Self {
            mode,
            kind: LadderKind::Creation,
        }
    }

    pub fn annihilate(mode: usize) -> Self {
        Self {
            mode,
            kind: LadderKind::Annihilation,
        }
    }

    fn adjoint(self) -> Self {
        let kind = match self.kind {
            LadderKind::Creation => LadderKind::Annihilation,
            LadderKind::Annihilation => LadderKind::Creation,
        };
        Self { mode: self.mode, kind }
    }
}

/// A coefficient times an ordered product of ladder operators.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionTerm {
    pub coefficient: Complex64,
    pub factors: Vec<Ladder>,
}

impl FermionTerm {
    pub fn new(coefficient: impl Into<Complex64>, factors: Vec<Ladder>) -> Self {
        Self {
            coefficient: coefficient.into(),
            factors,
        }
    }

    /// Hermitian adjoint: reversed product of adjoint factors, conjugated coefficient.
    pub fn adjoint(&self) -> Self {
        Self {
            coefficient: self.coefficient.conj(),
            factors: self.factors.iter().rev().map(|f| f.adjoint()).collect(),
        }
    }

    fn sort_key(&self) -> impl Iterator<Item = (usize, LadderKind)> + '_ {
        self.factors.iter().map(|f| (f.mode, f.kind))
    }
}

fn term_order(a: &FermionTerm, b: &FermionTerm) -> Ordering {
    a.sort_key().cmp(b.sort_key())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FermionOperator {
    pub n_modes: usize,
    pub terms: Vec<FermionTerm>,
    /// Scalar offset (Hartree).
    pub constant: f64,
}

impl FermionOperator {
    pub fn new(n_modes: usize) -> Self {
        Self {
            n_modes,
            terms: Vec::new(),
            constant: 0.0,
        }
    }

    pub fn push(&mut self, term: FermionTerm) -> Result<()> {
        if let Some(f) = term.factors.iter().find(|f| f.mode >= self.n_modes) {
            return Err(Error::Usage(format!("mode {} out of range for {} modes", f.mode, self.n_modes)));
        }
        self.terms.push(term);
        Ok(())
    }

    /// Sorts terms by `(first mode, kind, second mode, …)`, creation before
    /// annihilation.
    pub fn sort(&mut self) {
        self.terms.sort_by(term_order);
    }

    /// True when every term's adjoint is present with the conjugate
    /// coefficient (within 1e-12).
    pub fn is_hermitian(&self) -> bool {
        let mut by_factors: HashMap<&[Ladder], Complex64> = HashMap::new();
        for t in &self.terms {
            *by_factors.entry(t.factors.as_slice()).or_default() += t.coefficient;
        }
        self.terms.iter().all(|t| {
            let adj = t.adjoint();
            let mine = by_factors[t.factors.as_slice()];
            by_factors
                .get(adj.factors.as_slice())
                .is_some_and(|c| (c - mine.conj()).norm() <= 1e-12)
        })
    }
}

/// Builds `H = e_core + Σ h_pq a†_p a_q + ½ Σ ⟨pq|rs⟩ a†_p a†_q a_s a_r`
/// over `2n` spin orbitals with `⟨pq|rs⟩ = (PR|QS) δ(σp,σr) δ(σq,σs)`.
///
/// Products with a repeated creation or annihilation mode vanish and are
/// not emitted.
pub fn build_fermionic_hamiltonian(mo: &MOIntegrals) -> FermionOperator {
    let n = mo.n_orbitals;
    let modes = 2 * n;
    let split = |p: usize| (p % n, p / n);
    let mut op = FermionOperator::new(modes);
    op.constant = mo.e_core;

    for p in 0..modes {
        for q in 0..modes {
            let ((pp, sp), (qq, sq)) = (split(p), split(q));
            if sp != sq {
                continue;
            }
            let c = mo.h[(pp, qq)];
            if c.abs() >= DROP_TOLERANCE {
                op.terms.push(FermionTerm::new(c, vec![Ladder::create(p), Ladder::annihilate(q)]));
            }
        }
    }
    for p in 0..modes {
        for q in 0..modes {
            if p == q {
                continue;
            }
            for r in 0..modes {
                for s in 0..modes {
                    if r == s {
                        continue;
                    }
                    let ((pp, sp), (qq, sq), (rr, sr), (ss, ssp)) = (split(p), split(q), split(r), split(s));
                    if sp != sr || sq != ssp {
                        continue;
                    }
                    let c = 0.5 * mo.g.get(pp, rr, qq, ss);
                    if c.abs() >= DROP_TOLERANCE {
                        op.terms.push(FermionTerm::new(
                            c,
                            vec![Ladder::create(p), Ladder::create(q), Ladder::annihilate(s), Ladder::annihilate(r)],
                        ));
                    }
                }
            }
        }
    }
    op.sort();
    op
}

/// Folds the lowest `n_frozen` doubly occupied orbitals into `e_core` and an
/// effective one-body operator over the remaining orbitals.
pub fn freeze_core(mo: &MOIntegrals, n_frozen: usize) -> Result<MOIntegrals> {
    if !mo.n_electrons.is_multiple_of(2) {
        return Err(Error::Usage(format!(
            "cannot freeze a core with an odd electron count ({})",
            mo.n_electrons
        )));
    }
    if 2 * n_frozen > mo.n_electrons {
        return Err(Error::Usage(format!(
            "{n_frozen} frozen orbitals need {} electrons, only {} available",
            2 * n_frozen,
            mo.n_electrons
        )));
    }
    if n_frozen == 0 {
        return Ok(mo.clone());
    }
    let n = mo.n_orbitals;
    let g = &mo.g;
    let frozen = 0..n_frozen;

    let mut e_core = mo.e_core;
    for i in frozen.clone() {
        e_core += 2.0 * mo.h[(i, i)];
        for j in frozen.clone() {
            e_core += 2.0 * g.get(i, i, j, j) - g.get(i, j, j, i);
        }
    }
    let m = n - n_frozen;
    let mut h = nalgebra::DMatrix::zeros(m, m);
    for p in 0..m {
        for q in 0..m {
            let (pa, qa) = (p + n_frozen, q + n_frozen);
            let mut v = mo.h[(pa, qa)];
            for i in frozen.clone() {
                v += 2.0 * g.get(pa, qa, i, i) - g.get(pa, i, i, qa);
            }
            h[(p, q)] = v;
        }
    }
    let mut g_active = crate::integrals::EriTensor::zeros(m);
    for (p, q, r, s) in crate::integrals::canonical_indices(m) {
        g_active.set(p, q, r, s, g.get(p + n_frozen, q + n_frozen, r + n_frozen, s + n_frozen));
    }
    let h = (&h + h.transpose()) * 0.5;
    MOIntegrals::new(mo.n_electrons - 2 * n_frozen, h, g_active, e_core)
}

fn factor_text(f: &Ladder) -> String {
    match f.kind {
        LadderKind::Creation => format!("+_{}", f.mode),
        LadderKind::Annihilation => format!("-_{}", f.mode),
    }
}

/// One term per line as `<coefficient> * ( +_p -_q … )`, in sorted term
/// order, at most `limit` lines. The constant is not listed.
pub fn serialize_terms(op: &FermionOperator, limit: Option<usize>) -> String {
    let mut terms: Vec<&FermionTerm> = op.terms.iter().collect();
    terms.sort_by(|a, b| term_order(a, b));
    let mut out = String::new();
    for t in terms.into_iter().take(limit.unwrap_or(usize::MAX)) {
        let factors: Vec<String> = t.factors.iter().map(factor_text).collect();
        let _ = writeln!(out, "{} * ( {} )", complex_repr(t.coefficient), factors.join(" "));
    }
    out
}

/// Parses lines produced by [`serialize_terms`]. `n_modes` defaults to one
/// past the largest mode seen.
pub fn parse_terms(text: &str, n_modes: Option<usize>) -> Result<FermionOperator> {
    let mut terms = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (coef, rest) = line
            .split_once(" * ")
            .ok_or_else(|| Error::parse(lineno, format!("expected `<coefficient> * ( … )`, got `{line}`")))?;
        let coefficient =
            parse_complex(coef).ok_or_else(|| Error::parse(lineno, format!("malformed coefficient `{coef}`")))?;
        let inner = rest
            .trim()
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| Error::parse(lineno, "factor list must be parenthesized"))?;
        let factors = inner
            .split_whitespace()
            .map(|tok| {
                let (kind, mode) = if let Some(m) = tok.strip_prefix("+_") {
                    (LadderKind::Creation, m)
                } else if let Some(m) = tok.strip_prefix("-_") {
                    (LadderKind::Annihilation, m)
                } else {
                    return Err(Error::parse(lineno, format!("bad factor `{tok}`")));
                };
                let mode = mode
                    .parse()
                    .map_err(|_| Error::parse(lineno, format!("bad mode in `{tok}`")))?;
                Ok(Ladder { mode, kind })
            })
            .collect::<Result<Vec<_>>>()?;
        terms.push(FermionTerm { coefficient, factors });
    }
    let seen = terms
        .iter()
        .flat_map(|t| t.factors.iter().map(|f| f.mode + 1))
        .max()
        .unwrap_or(0);
    let n_modes = n_modes.unwrap_or(seen);
    if seen > n_modes {
        return Err(Error::parse(0, format!("mode {} exceeds n_modes {n_modes}", seen - 1)));
    }
    Ok(FermionOperator {
        n_modes,
        terms,
        constant: 0.0,
    })
}

/// Full operator file (`.fop`): a `# n_modes` and `# constant` header,
/// then the term listing.
pub fn write_fop(op: &FermionOperator) -> String {
    format!(
        "# n_modes {}\n# constant {}\n{}",
        op.n_modes,
        float_repr(op.constant),
        serialize_terms(op, None)
    )
}

pub fn parse_fop(text: &str) -> Result<FermionOperator> {
    let mut n_modes = None;
    let mut constant = 0.0;
    for (i, line) in text.lines().enumerate() {
        let Some(rest) = line.trim().strip_prefix('#') else { continue };
        let mut it = rest.split_whitespace();
        match (it.next(), it.next()) {
            (Some("n_modes"), Some(v)) => {
                n_modes = Some(v.parse().map_err(|_| Error::parse(i + 1, format!("bad n_modes `{v}`")))?)
            }
            (Some("constant"), Some(v)) => {
                constant = v.parse().map_err(|_| Error::parse(i + 1, format!("bad constant `{v}`")))?
            }
            _ => {}
        }
    }
    let mut op = parse_terms(text, n_modes)?;
    op.constant = constant;
    Ok(op)
}
