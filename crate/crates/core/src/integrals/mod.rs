//! Atomic-orbital integrals over contracted s-type Gaussians.
//!
//! All formulas here are the closed forms for s primitives
//! `exp(-α|r-A|²)`; the only special function needed is the zeroth-order
//! Boys function.

mod basis;
mod eri;

use std::f64::consts::PI;

use nalgebra::{DMatrix, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use basis::{atomic_number, parse_geometry, BasisSet, ShellKind};
pub use eri::{orbit, EriTensor};
pub(crate) use eri::canonical_indices;

use crate::{Error, Result};

/// 1 Å in Bohr.
pub const ANGSTROM_TO_BOHR: f64 = 1.8897259886;

/// Below this argument `boys_f0` switches to its Taylor series.
pub const BOYS_SERIES_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub symbol: String,
    pub atomic_number: u32,
    /// Bohr.
    pub position: [f64; 3],
}

impl Atom {
    pub fn new(symbol: &str, position_bohr: [f64; 3]) -> Result<Self> {
        let z = atomic_number(symbol)
            .ok_or_else(|| Error::Usage(format!("unknown element symbol `{symbol}`")))?;
        Self::with_number(symbol, z, position_bohr)
    }

    pub fn with_number(symbol: &str, atomic_number: u32, position_bohr: [f64; 3]) -> Result<Self> {
        if atomic_number == 0 {
            return Err(Error::Usage(format!("atom `{symbol}` has atomic number 0")));
        }
        if position_bohr.iter().any(|c| !c.is_finite()) {
            return Err(Error::Usage(format!("atom `{symbol}` has a non-finite coordinate")));
        }
        Ok(Self {
            symbol: symbol.to_string(),
            atomic_number,
            position: position_bohr,
        })
    }

    pub fn from_angstrom(symbol: &str, position: [f64; 3]) -> Result<Self> {
        Self::new(symbol, position.map(|c| c * ANGSTROM_TO_BOHR))
    }

    fn r(&self) -> Vector3<f64> {
        Vector3::from(self.position)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub atoms: Vec<Atom>,
    pub charge: i32,
    pub n_electrons: usize,
}

impl Geometry {
    pub fn new(atoms: Vec<Atom>, charge: i32) -> Result<Self> {
        let total: i64 = atoms.iter().map(|a| a.atomic_number as i64).sum();
        let n = total - charge as i64;
        if n < 0 {
            return Err(Error::Usage(format!(
                "charge {charge} leaves a negative electron count"
            )));
        }
        Ok(Self {
            atoms,
            charge,
            n_electrons: n as usize,
        })
    }

    /// Moves every atom by `shift` (Bohr).
    pub fn translated(&self, shift: [f64; 3]) -> Self {
        let mut g = self.clone();
        for a in &mut g.atoms {
            for k in 0..3 {
                a.position[k] += shift[k];
            }
        }
        g
    }

    /// Hill-style formula with counts, atoms in input order of first
    /// appearance (`H2`, `LiH`, `HeH`).
    pub fn formula(&self) -> String {
        let mut order: Vec<(&str, usize)> = Vec::new();
        for a in &self.atoms {
            match order.iter_mut().find(|(s, _)| *s == a.symbol) {
                Some(entry) => entry.1 += 1,
                None => order.push((&a.symbol, 1)),
            }
        }
        let mut s = String::new();
        for (sym, count) in order {
            s.push_str(sym);
            if count > 1 {
                s.push_str(&count.to_string());
            }
        }
        match self.charge {
            0 => {}
            1 => s.push('+'),
            -1 => s.push('-'),
            c if c > 0 => s.push_str(&format!("{c}+")),
            c => s.push_str(&format!("{}-", -c)),
        }
        s
    }
}

/// A normalized contraction of s-type primitives.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractedGaussian {
    pub center: [f64; 3],
    pub exponents: Vec<f64>,
    /// Contraction coefficients as tabulated (for normalized primitives).
    pub coefficients: Vec<f64>,
    /// Coefficients with primitive and contraction normalization folded in.
    scaled: Vec<f64>,
}

impl ContractedGaussian {
    pub fn new(center: [f64; 3], exponents: Vec<f64>, coefficients: Vec<f64>) -> Result<Self> {
        if exponents.is_empty() {
            return Err(Error::UnsupportedBasis("contraction without primitives".into()));
        }
        if exponents.len() != coefficients.len() {
            return Err(Error::UnsupportedBasis(format!(
                "{} exponents but {} coefficients",
                exponents.len(),
                coefficients.len()
            )));
        }
        if let Some(a) = exponents.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::UnsupportedBasis(format!("non-positive exponent {a}")));
        }
        let mut scaled: Vec<f64> = exponents
            .iter()
            .zip(&coefficients)
            .map(|(a, c)| c * (2.0 * a / PI).powf(0.75))
            .collect();
        let mut self_overlap = 0.0;
        for (a, ca) in exponents.iter().zip(&scaled) {
            for (b, cb) in exponents.iter().zip(&scaled) {
                self_overlap += ca * cb * (PI / (a + b)).powf(1.5);
            }
        }
        if !(self_overlap > 0.0) {
            return Err(Error::UnsupportedBasis("contraction has zero norm".into()));
        }
        let k = self_overlap.sqrt().recip();
        scaled.iter_mut().for_each(|c| *c *= k);
        Ok(Self {
            center,
            exponents,
            coefficients,
            scaled,
        })
    }

    fn primitives(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.exponents.iter().copied().zip(self.scaled.iter().copied())
    }

    fn r(&self) -> Vector3<f64> {
        Vector3::from(self.center)
    }
}

/// AO-basis integrals for one geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct AOIntegrals {
    pub n_ao: usize,
    pub overlap: DMatrix<f64>,
    /// Kinetic plus nuclear attraction.
    pub core_hamiltonian: DMatrix<f64>,
    pub eri: EriTensor,
    pub e_nuclear: f64,
    pub n_electrons: usize,
}

/// Zeroth-order Boys function `F0(x) = ∫₀¹ exp(-x t²) dt`.
pub fn boys_f0(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!("boys_f0 needs finite x ≥ 0, got {x}")));
    }
    if x <= BOYS_SERIES_THRESHOLD {
        Ok(1.0 - x / 3.0 + x * x / 10.0 - x * x * x / 42.0)
    } else {
        let t = x.sqrt();
        Ok(0.5 * (PI / x).sqrt() * libm::erf(t))
    }
}

/// `Σ_{i<j} Z_i Z_j / r_ij` in Hartree.
pub fn nuclear_repulsion(geometry: &Geometry) -> Result<f64> {
    let mut e = 0.0;
    for (i, a) in geometry.atoms.iter().enumerate() {
        for (j, b) in geometry.atoms.iter().enumerate().skip(i + 1) {
            let r = (a.r() - b.r()).norm();
            if r == 0.0 {
                return Err(Error::DegenerateGeometry(i, j));
            }
            e += (a.atomic_number * b.atomic_number) as f64 / r;
        }
    }
    Ok(e)
}

fn boys(x: f64) -> f64 {
    boys_f0(x).expect("argument is a squared distance times a positive factor")
}

fn overlap_prim(a: f64, ra: &Vector3<f64>, b: f64, rb: &Vector3<f64>) -> f64 {
    let p = a + b;
    let ab2 = (ra - rb).norm_squared();
    (PI / p).powf(1.5) * (-a * b / p * ab2).exp()
}

fn kinetic_prim(a: f64, ra: &Vector3<f64>, b: f64, rb: &Vector3<f64>) -> f64 {
    let p = a + b;
    let mu = a * b / p;
    let ab2 = (ra - rb).norm_squared();
    mu * (3.0 - 2.0 * mu * ab2) * (PI / p).powf(1.5) * (-mu * ab2).exp()
}

fn attraction_prim(a: f64, ra: &Vector3<f64>, b: f64, rb: &Vector3<f64>, rc: &Vector3<f64>) -> f64 {
    let p = a + b;
    let mu = a * b / p;
    let rp = (a * ra + b * rb) / p;
    -2.0 * PI / p * (-mu * (ra - rb).norm_squared()).exp() * boys(p * (rp - rc).norm_squared())
}

fn eri_prim(
    (a, ra): (f64, &Vector3<f64>),
    (b, rb): (f64, &Vector3<f64>),
    (c, rc): (f64, &Vector3<f64>),
    (d, rd): (f64, &Vector3<f64>),
) -> f64 {
    let p = a + b;
    let q = c + d;
    let rp = (a * ra + b * rb) / p;
    let rq = (c * rc + d * rd) / q;
    let pref = 2.0 * PI.powf(2.5) / (p * q * (p + q).sqrt());
    let gauss = (-a * b / p * (ra - rb).norm_squared() - c * d / q * (rc - rd).norm_squared()).exp();
    pref * gauss * boys(p * q / (p + q) * (rp - rq).norm_squared())
}

fn contract2(
    f: &ContractedGaussian,
    g: &ContractedGaussian,
    prim: impl Fn(f64, &Vector3<f64>, f64, &Vector3<f64>) -> f64,
) -> f64 {
    let (rf, rg) = (f.r(), g.r());
    f.primitives()
        .flat_map(|(a, ca)| g.primitives().map(move |(b, cb)| (a, ca, b, cb)))
        .map(|(a, ca, b, cb)| ca * cb * prim(a, &rf, b, &rg))
        .sum()
}

fn contract4(f: &ContractedGaussian, g: &ContractedGaussian, h: &ContractedGaussian, k: &ContractedGaussian) -> f64 {
    let (rf, rg, rh, rk) = (f.r(), g.r(), h.r(), k.r());
    let mut sum = 0.0;
    for (a, ca) in f.primitives() {
        for (b, cb) in g.primitives() {
            for (c, cc) in h.primitives() {
                for (d, cd) in k.primitives() {
                    sum += ca * cb * cc * cd * eri_prim((a, &rf), (b, &rg), (c, &rh), (d, &rk));
                }
            }
        }
    }
    sum
}

/// Overlap of two contracted functions; used by tests and basis checks.
pub fn overlap(f: &ContractedGaussian, g: &ContractedGaussian) -> f64 {
    contract2(f, g, overlap_prim)
}

/// Fills S, the core Hamiltonian, the ERI tensor and the nuclear repulsion.
///
/// `basis[i]` holds the contracted functions centred on atom `i`; their
/// centres are taken from the geometry, not from the functions.
pub fn build_ao_integrals(geometry: &Geometry, basis: &[Vec<ContractedGaussian>]) -> Result<AOIntegrals> {
    if basis.len() != geometry.atoms.len() {
        return Err(Error::Usage(format!(
            "{} atoms but basis lists for {}",
            geometry.atoms.len(),
            basis.len()
        )));
    }
    let e_nuclear = nuclear_repulsion(geometry)?;
    let mut functions = Vec::new();
    for (atom, fns) in geometry.atoms.iter().zip(basis) {
        if fns.is_empty() {
            return Err(Error::UnsupportedBasis(format!("no basis functions on {}", atom.symbol)));
        }
        for f in fns {
            let mut f = f.clone();
            f.center = atom.position;
            functions.push(f);
        }
    }

    let n = functions.len();
    let mut s = DMatrix::zeros(n, n);
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let (fi, fj) = (&functions[i], &functions[j]);
            let sij = if i == j { 1.0 } else { overlap(fi, fj) };
            let mut hij = contract2(fi, fj, kinetic_prim);
            for atom in &geometry.atoms {
                let rc = atom.r();
                hij += atom.atomic_number as f64
                    * contract2(fi, fj, |a, ra, b, rb| attraction_prim(a, ra, b, rb, &rc));
            }
            s[(i, j)] = sij;
            s[(j, i)] = sij;
            h[(i, j)] = hij;
            h[(j, i)] = hij;
        }
    }

    let quads: Vec<_> = canonical_indices(n).collect();
    let values: Vec<f64> = quads
        .par_iter()
        .map(|&(p, q, r, s)| contract4(&functions[p], &functions[q], &functions[r], &functions[s]))
        .collect();
    let mut eri = EriTensor::zeros(n);
    for (&(p, q, r, s), v) in quads.iter().zip(values) {
        eri.set(p, q, r, s, v);
    }

    Ok(AOIntegrals {
        n_ao: n,
        overlap: s,
        core_hamiltonian: h,
        eri,
        e_nuclear,
        n_electrons: geometry.n_electrons,
    })
}
