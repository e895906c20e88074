#![allow(dead_code)]

use groundstate::integrals::{Atom, EriTensor, Geometry};
use groundstate::integrals_io::MOIntegrals;
use groundstate::workbench::Problem;
use groundstate::integrals::BasisSet;
use groundstate::scf::ScfOptions;
use nalgebra::DMatrix;
use rand::Rng;

/// pyscf RHF/FCI, STO-3G.
pub const H2_0_7354_E_HF: f64 = -1.1169814443382906;
pub const H2_0_7354_E_FCI: f64 = -1.1373058078789535;
pub const H2_1_4BOHR_E_HF: f64 = -1.116714325062551;
pub const H2_1_4BOHR_E_FCI: f64 = -1.1372759436170439;
pub const H2_1_4BOHR_S01: f64 = 0.659318206134864;
pub const H2_1_4BOHR_ERI_0000: f64 = 0.7746059439198978;
pub const H2_1_4BOHR_H00_MO: f64 = -1.2527970618358173;
pub const HE_E_HF: f64 = -2.807783957539974;

pub fn diatomic(a: &str, b: &str, r_angstrom: f64, charge: i32) -> Geometry {
    Geometry::new(
        vec![
            Atom::from_angstrom(a, [0.0, 0.0, 0.0]).unwrap(),
            Atom::from_angstrom(b, [0.0, 0.0, r_angstrom]).unwrap(),
        ],
        charge,
    )
    .unwrap()
}

pub fn problem(a: &str, b: &str, r_angstrom: f64, charge: i32) -> Problem {
    Problem::from_geometry(&diatomic(a, b, r_angstrom, charge), &BasisSet::sto3g(), &ScfOptions::default()).unwrap()
}

pub fn h2(r_angstrom: f64) -> Problem {
    problem("H", "H", r_angstrom, 0)
}

/// Random real integrals with full 8-fold symmetry.
pub fn random_mo(n: usize, n_electrons: usize, rng: &mut impl Rng) -> MOIntegrals {
    let mut h = DMatrix::zeros(n, n);
    for p in 0..n {
        for q in 0..=p {
            let v = rng.random_range(-1.0..1.0);
            h[(p, q)] = v;
            h[(q, p)] = v;
        }
    }
    let mut g = EriTensor::zeros(n);
    for p in 0..n {
        for q in 0..=p {
            for r in 0..n {
                for s in 0..=r {
                    if (r, s) <= (p, q) {
                        g.set(p, q, r, s, rng.random_range(-0.5..0.5));
                    }
                }
            }
        }
    }
    MOIntegrals::new(n_electrons, h, g, rng.random_range(-1.0..1.0)).unwrap()
}
