//! Exact ground-state energies.
//!
//! Two independent routes: dense diagonalization of a qubit Hamiltonian, and
//! a determinant-basis FCI built straight from MO integrals with
//! Slater–Condon rules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::integrals_io::MOIntegrals;
use crate::pauli::PauliSum;
use crate::statevector::Statevector;
use crate::{Error, Result};

/// Largest qubit count [`dense_ground_energy`] will materialize.
pub const DENSE_QUBIT_LIMIT: usize = 14;
/// Largest spatial-orbital count accepted by [`fci_determinant_oracle`].
pub const FCI_ORBITAL_LIMIT: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub ground_energy: f64,
    pub ground_vector: Option<Statevector>,
    pub n_qubits: usize,
}

impl SpectrumResult {
    /// `‖Hv − Ev‖₂`, or `None` when no vector was kept.
    pub fn residual(&self, h: &PauliSum) -> Option<f64> {
        let v = self.ground_vector.as_ref()?;
        let mut hv = vec![Complex64::new(0.0, 0.0); v.amplitudes.len()];
        for t in &h.terms {
            for (i, a) in v.amplitudes.iter().enumerate() {
                let (j, phase) = t.string.apply_to_basis(i);
                hv[j] += t.coefficient * phase * a;
            }
        }
        let r: f64 = hv
            .iter()
            .zip(&v.amplitudes)
            .map(|(x, a)| (x - a * self.ground_energy).norm_sqr())
            .sum();
        Some(r.sqrt())
    }
}

/// Lowest eigenvalue of `h` over the full `2^n` space.
pub fn dense_ground_energy(h: &PauliSum) -> Result<SpectrumResult> {
    let basis: Vec<usize> = (0..1usize << check_dense(h)?).collect();
    ground_in_subspace(h, &basis)
}

/// Lowest eigenvalue of `h` restricted to basis states with `n_alpha` ones
/// on qubits `0..n/2` and `n_beta` ones on qubits `n/2..n` (blocked spin
/// ordering). Number- and spin-conserving Hamiltonians are block diagonal in
/// these sectors.
pub fn dense_ground_energy_in_sector(h: &PauliSum, n_alpha: usize, n_beta: usize) -> Result<SpectrumResult> {
    let n = check_dense(h)?;
    if n % 2 != 0 {
        return Err(Error::Usage(format!("sector restriction needs an even qubit count, got {n}")));
    }
    let half = n / 2;
    if n_alpha > half || n_beta > half {
        return Err(Error::Usage(format!(
            "sector ({n_alpha}, {n_beta}) does not fit {half} orbitals per spin"
        )));
    }
    let low = (1usize << half) - 1;
    let basis: Vec<usize> = (0..1usize << n)
        .filter(|i| (i & low).count_ones() as usize == n_alpha && (i >> half).count_ones() as usize == n_beta)
        .collect();
    ground_in_subspace(h, &basis)
}

/// Dense ground energy of an electronic Hamiltonian in the closed-shell
/// (or lowest-`S_z` open-shell) sector of `n_electrons`.
pub fn electronic_ground_energy(h: &PauliSum, n_electrons: usize) -> Result<SpectrumResult> {
    let (na, nb) = spin_split(n_electrons);
    dense_ground_energy_in_sector(h, na, nb)
}

fn spin_split(n_electrons: usize) -> (usize, usize) {
    (n_electrons.div_ceil(2), n_electrons / 2)
}

fn check_dense(h: &PauliSum) -> Result<usize> {
    if h.n_qubits > DENSE_QUBIT_LIMIT {
        return Err(Error::Resource(format!(
            "{} qubits exceeds the {DENSE_QUBIT_LIMIT}-qubit dense limit",
            h.n_qubits
        )));
    }
    if !h.is_hermitian() {
        return Err(Error::Usage("dense diagonalization needs a Hermitian operator".into()));
    }
    Ok(h.n_qubits)
}

fn ground_in_subspace(h: &PauliSum, basis: &[usize]) -> Result<SpectrumResult> {
    let dim = basis.len();
    let full = 1usize << h.n_qubits;
    let mut position = vec![usize::MAX; full];
    for (k, &i) in basis.iter().enumerate() {
        position[i] = k;
    }
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for (col, &i) in basis.iter().enumerate() {
        for t in &h.terms {
            let (j, phase) = t.string.apply_to_basis(i);
            let row = position[j];
            if row == usize::MAX {
                continue;
            }
            m[(row, col)] += t.coefficient * phase;
        }
    }

    let (energy, vector): (f64, Vec<Complex64>) = if m.iter().all(|z| z.im == 0.0) {
        let real = m.map(|z| z.re);
        let eig = SymmetricEigen::new(real);
        let k = argmin(eig.eigenvalues.as_slice());
        let v: DVector<f64> = eig.eigenvectors.column(k).into_owned();
        (eig.eigenvalues[k], v.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    } else {
        let eig = SymmetricEigen::new(m);
        let k = argmin(eig.eigenvalues.as_slice());
        (eig.eigenvalues[k], eig.eigenvectors.column(k).iter().copied().collect())
    };

    let mut amplitudes = vec![Complex64::new(0.0, 0.0); full];
    for (k, &i) in basis.iter().enumerate() {
        amplitudes[i] = vector[k];
    }
    Ok(SpectrumResult {
        ground_energy: energy,
        ground_vector: Some(Statevector {
            n_qubits: h.n_qubits,
            amplitudes,
        }),
        n_qubits: h.n_qubits,
    })
}

fn argmin(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .expect("non-empty spectrum")
}

/// FCI energy (including `e_core`) in the basis of all determinants with the
/// molecule's electron count and lowest `S_z`.
///
/// Spin orbital `p` is spatial orbital `p mod n` with spin α for `p < n`.
pub fn fci_determinant_oracle(mo: &MOIntegrals) -> Result<f64> {
    let n = mo.n_orbitals;
    if n > FCI_ORBITAL_LIMIT {
        return Err(Error::Resource(format!(
            "{n} orbitals exceeds the {FCI_ORBITAL_LIMIT}-orbital FCI limit"
        )));
    }
    let (na, nb) = spin_split(mo.n_electrons);
    let low = (1u64 << n) - 1;
    let dets: Vec<u64> = (0..1u64 << (2 * n))
        .filter(|d| (d & low).count_ones() as usize == na && (d >> n).count_ones() as usize == nb)
        .collect();

    let spatial = |p: usize| p % n;
    let spin = |p: usize| p / n;
    let one = |p: usize, q: usize| -> f64 {
        if spin(p) == spin(q) { mo.h[(spatial(p), spatial(q))] } else { 0.0 }
    };
    // ⟨pq|rs⟩ in physicists' notation
    let coulomb = |p: usize, q: usize, r: usize, s: usize| -> f64 {
        if spin(p) == spin(r) && spin(q) == spin(s) {
            mo.g.get(spatial(p), spatial(r), spatial(q), spatial(s))
        } else {
            0.0
        }
    };
    let anti = |p, q, r, s| coulomb(p, q, r, s) - coulomb(p, q, s, r);
    let occupied = |d: u64| (0..2 * n).filter(move |&p| d >> p & 1 == 1);

    let dim = dets.len();
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for (col, &di) in dets.iter().enumerate() {
        for (row, &dj) in dets.iter().enumerate() {
            let diff = di ^ dj;
            let value = match diff.count_ones() {
                0 => {
                    let occ: Vec<usize> = occupied(di).collect();
                    let mut e = 0.0;
                    for &i in &occ {
                        e += one(i, i);
                        for &j in &occ {
                            e += 0.5 * anti(i, j, i, j);
                        }
                    }
                    e
                }
                2 => {
                    let i = (di & diff).trailing_zeros() as usize;
                    let a = (dj & diff).trailing_zeros() as usize;
                    let sign = excitation_sign(di, &[i], &[a]);
                    let mut e = one(a, i);
                    for j in occupied(di) {
                        e += anti(a, j, i, j);
                    }
                    sign * e
                }
                4 => {
                    let holes: Vec<usize> = occupied(di & diff).collect();
                    let parts: Vec<usize> = occupied(dj & diff).collect();
                    let (i, j) = (holes[0], holes[1]);
                    let (a, b) = (parts[0], parts[1]);
                    excitation_sign(di, &[i, j], &[b, a]) * anti(a, b, i, j)
                }
                _ => 0.0,
            };
            m[(row, col)] = value;
        }
    }
    let eig = SymmetricEigen::new(m);
    let k = argmin(eig.eigenvalues.as_slice());
    Ok(eig.eigenvalues[k] + mo.e_core)
}

/// Sign of `a†_{c_last}…a†_{c_first} a_{h_last}…a_{h_first} |det⟩`, applying
/// annihilators in `holes` order then creators in `creations` order.
fn excitation_sign(det: u64, holes: &[usize], creations: &[usize]) -> f64 {
    let mut d = det;
    let mut sign = 1.0;
    for &p in holes.iter().chain(creations) {
        if (d & ((1u64 << p) - 1)).count_ones() % 2 == 1 {
            sign = -sign;
        }
        d ^= 1u64 << p;
    }
    sign
}
