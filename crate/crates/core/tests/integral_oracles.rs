//! AO integrals against numerical quadrature and reference values.

mod common;

use common::*;
use groundstate::integrals::{build_ao_integrals, BasisSet, ANGSTROM_TO_BOHR};
use groundstate::scf::{ao_to_mo, scf_solve, ScfOptions};

const H_EXPONENTS: [f64; 3] = [3.42525091, 0.62391373, 0.16885540];
const H_COEFFS: [f64; 3] = [0.15432897, 0.53532814, 0.44463454];

/// Unnormalized contracted 1s at squared distance `r2`.
fn raw_1s(r2: f64) -> f64 {
    H_EXPONENTS
        .iter()
        .zip(H_COEFFS)
        .map(|(a, c)| c * (2.0 * a / std::f64::consts::PI).powf(0.75) * (-a * r2).exp())
        .sum()
}

/// Composite Simpson weights on `n` (even) intervals.
fn simpson(a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    let h = (b - a) / n as f64;
    (0..=n)
        .map(|k| {
            let w = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            (a + k as f64 * h, w * h / 3.0)
        })
        .collect()
}

fn radial_norm() -> f64 {
    let four_pi = 4.0 * std::f64::consts::PI;
    let self_overlap: f64 = simpson(0.0, 12.0, 4000)
        .iter()
        .map(|(r, w)| w * four_pi * r * r * raw_1s(r * r).powi(2))
        .sum();
    self_overlap.sqrt()
}

fn h2_1_4_bohr() -> groundstate::integrals::AOIntegrals {
    let g = diatomic("H", "H", 1.4 / ANGSTROM_TO_BOHR, 0);
    build_ao_integrals(&g, &BasisSet::sto3g().for_geometry(&g).unwrap()).unwrap()
}

#[test]
fn overlap_matches_cylindrical_quadrature() {
    let n = radial_norm();
    let r = 1.4;
    let rho = simpson(0.0, 10.0, 600);
    let z = simpson(-10.0, 10.0 + r, 1200);
    let mut s = 0.0;
    for (p, wp) in &rho {
        for (zz, wz) in &z {
            let a = raw_1s(p * p + zz * zz) / n;
            let b = raw_1s(p * p + (zz - r).powi(2)) / n;
            s += wp * wz * 2.0 * std::f64::consts::PI * p * a * b;
        }
    }
    let ao = h2_1_4_bohr();
    assert!((ao.overlap[(0, 1)] - s).abs() < 1e-7, "{} vs quadrature {s}", ao.overlap[(0, 1)]);
    assert!((ao.overlap[(0, 1)] - H2_1_4BOHR_S01).abs() < 1e-8);
    assert!((ao.overlap[(0, 0)] - 1.0).abs() < 1e-12);
}

#[test]
fn self_repulsion_matches_shell_theorem() {
    // V(r) = Q(r)/r + ∫_r^∞ 4π s ρ(s) ds, (00|00) = ∫ 4π r² ρ V
    let n = radial_norm();
    let pts = simpson(0.0, 12.0, 12000);
    let four_pi = 4.0 * std::f64::consts::PI;
    let rho: Vec<f64> = pts.iter().map(|(r, _)| (raw_1s(r * r) / n).powi(2)).collect();
    let h = pts[1].0;
    // cumulative trapezoid for the enclosed charge and outer shell potential
    let m = pts.len();
    let mut inner = vec![0.0; m];
    for k in 1..m {
        let f0 = four_pi * pts[k - 1].0.powi(2) * rho[k - 1];
        let f1 = four_pi * pts[k].0.powi(2) * rho[k];
        inner[k] = inner[k - 1] + 0.5 * h * (f0 + f1);
    }
    let mut outer = vec![0.0; m];
    for k in (0..m - 1).rev() {
        let f0 = four_pi * pts[k].0 * rho[k];
        let f1 = four_pi * pts[k + 1].0 * rho[k + 1];
        outer[k] = outer[k + 1] + 0.5 * h * (f0 + f1);
    }
    let mut eri = 0.0;
    for (k, (r, w)) in pts.iter().enumerate().skip(1) {
        let v = inner[k] / r + outer[k];
        eri += w * four_pi * r * r * rho[k] * v;
    }
    let ao = h2_1_4_bohr();
    let got = ao.eri.get(0, 0, 0, 0);
    assert!((got - eri).abs() < 1e-6, "{got} vs quadrature {eri}");
    assert!((got - H2_1_4BOHR_ERI_0000).abs() < 1e-8);
}

#[test]
fn bonding_orbital_core_energy() {
    let ao = h2_1_4_bohr();
    let s = ao.overlap[(0, 1)];
    let symmetric = (ao.core_hamiltonian[(0, 0)] + ao.core_hamiltonian[(0, 1)]) / (1.0 + s);
    let scf = scf_solve(&ao, &ScfOptions::default()).unwrap();
    let mo = ao_to_mo(&ao, &scf.mo_coefficients).unwrap();
    assert!((mo.h[(0, 0)] - symmetric).abs() < 1e-10);
    assert!((mo.h[(0, 0)] - H2_1_4BOHR_H00_MO).abs() < 1e-7);
    assert!((scf.e_hf - H2_1_4BOHR_E_HF).abs() < 1e-7);
}

#[test]
fn scf_reference_energies() {
    let p = h2(0.7354);
    assert!((p.e_hf - H2_0_7354_E_HF).abs() < 1e-7);
    let he = groundstate::integrals::Geometry::new(
        vec![groundstate::integrals::Atom::from_angstrom("He", [0.0; 3]).unwrap()],
        0,
    )
    .unwrap();
    let ao = build_ao_integrals(&he, &BasisSet::sto3g().for_geometry(&he).unwrap()).unwrap();
    let scf = scf_solve(&ao, &ScfOptions::default()).unwrap();
    assert!((scf.e_hf - HE_E_HF).abs() < 1e-7);
}
