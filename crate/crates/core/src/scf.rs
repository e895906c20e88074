//! Restricted closed-shell Hartree-Fock with DIIS extrapolation.

use std::collections::VecDeque;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::integrals::{AOIntegrals, EriTensor};
use crate::integrals_io::MOIntegrals;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScfOptions {
    /// Convergence threshold on |ΔE| (Hartree).
    pub energy_tolerance: f64,
    /// Convergence threshold on the max-norm of the orthonormal-basis DIIS error.
    pub error_tolerance: f64,
    pub max_iterations: usize,
    pub diis_capacity: usize,
}

impl Default for ScfOptions {
    fn default() -> Self {
        Self {
            energy_tolerance: 1e-10,
            error_tolerance: 1e-8,
            max_iterations: 200,
            diis_capacity: 8,
        }
    }
}

/// One SCF iteration, printed as `iter <k> E=<energy> dE=<delta> err=<norm>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScfIteration {
    pub iteration: usize,
    pub energy: f64,
    pub delta: f64,
    pub error_norm: f64,
}

impl fmt::Display for ScfIteration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "iter {} E={:.12} dE={:.3e} err={:.3e}",
            self.iteration, self.energy, self.delta, self.error_norm
        )
    }
}

#[derive(Debug, Clone)]
pub struct ScfResult {
    /// Columns are MOs, ordered by ascending orbital energy.
    pub mo_coefficients: DMatrix<f64>,
    pub orbital_energies: Vec<f64>,
    pub density: DMatrix<f64>,
    pub e_hf: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<ScfIteration>,
}

/// Bounded queue of (Fock, error) pairs, oldest first.
#[derive(Debug, Clone)]
pub struct DiisHistory {
    capacity: usize,
    entries: VecDeque<(DMatrix<f64>, DMatrix<f64>)>,
}

impl DiisHistory {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity: capacity.max(1),
            entries: VecDeque::with_capacity(capacity.max(1)),
        }
    }

    pub fn push(&mut self, fock: DMatrix<f64>, error: DMatrix<f64>) {
        assert_eq!(fock.shape(), error.shape(), "error matrix must match Fock shape");
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back((fock, error));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }
}

#[derive(Debug, Clone)]
pub struct DiisExtrapolation {
    pub fock: DMatrix<f64>,
    /// One weight per entry used, oldest first; dropped entries are absent.
    pub coefficients: Vec<f64>,
}

/// Solves the DIIS least-squares problem with the Σc = 1 constraint and
/// returns Σ cᵢ Fᵢ. Entries are dropped oldest-first while the system is
/// singular.
pub fn diis_extrapolate(history: &DiisHistory) -> Result<DiisExtrapolation> {
    if history.is_empty() {
        return Err(Error::Usage("DIIS extrapolation needs at least one entry".into()));
    }
    let entries: Vec<_> = history.entries.iter().collect();
    for start in 0..entries.len() {
        let used = &entries[start..];
        if let Some(c) = diis_coefficients(used) {
            let mut fock = DMatrix::zeros(used[0].0.nrows(), used[0].0.ncols());
            for (w, (f, _)) in c.iter().zip(used) {
                fock += f * *w;
            }
            return Ok(DiisExtrapolation { fock, coefficients: c });
        }
    }
    unreachable!("a single entry always yields c = [1]")
}

fn diis_coefficients(entries: &[&(DMatrix<f64>, DMatrix<f64>)]) -> Option<Vec<f64>> {
    let m = entries.len();
    if m == 1 {
        return Some(vec![1.0]);
    }
    let mut b = DMatrix::zeros(m + 1, m + 1);
    for i in 0..m {
        for j in 0..=i {
            let v = entries[i].1.dot(&entries[j].1);
            b[(i, j)] = v;
            b[(j, i)] = v;
        }
    }
    // rescale the error block so the constraint row is commensurate
    let scale = (0..m).map(|i| b[(i, i)]).fold(0.0_f64, f64::max);
    if !(scale > 0.0) || !scale.is_finite() {
        return None;
    }
    for i in 0..m {
        for j in 0..m {
            b[(i, j)] /= scale;
        }
        b[(i, m)] = -1.0;
        b[(m, i)] = -1.0;
    }
    let mut rhs = DVector::zeros(m + 1);
    rhs[m] = -1.0;

    let svd = b.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-12 * smax) {
        return None;
    }
    let x = b.lu().solve(&rhs)?;
    let c: Vec<f64> = x.iter().take(m).copied().collect();
    if c.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some(c)
}

/// Symmetric eigendecomposition with eigenvalues ascending.
pub(crate) fn sorted_eigh(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), m.nrows(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// `S^(-1/2)` by symmetric orthogonalization.
fn symmetric_orthogonalizer(s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (values, vectors) = sorted_eigh(s);
    let smallest = values.first().copied().unwrap_or(1.0);
    if !(smallest > 1e-10) {
        return Err(Error::LinearDependence(smallest));
    }
    let inv_sqrt = DMatrix::from_diagonal(&DVector::from_iterator(values.len(), values.iter().map(|v| v.sqrt().recip())));
    Ok(&vectors * inv_sqrt * vectors.transpose())
}

/// `F = Hcore + Σ_rs D_rs [(pq|rs) − ½ (pr|qs)]`.
pub fn fock_matrix(hcore: &DMatrix<f64>, eri: &EriTensor, density: &DMatrix<f64>) -> DMatrix<f64> {
    let n = hcore.nrows();
    let mut f = hcore.clone();
    for p in 0..n {
        for q in 0..=p {
            let mut g = 0.0;
            for r in 0..n {
                for s in 0..n {
                    g += density[(r, s)] * (eri.get(p, q, r, s) - 0.5 * eri.get(p, r, q, s));
                }
            }
            f[(p, q)] += g;
            if p != q {
                f[(q, p)] += g;
            }
        }
    }
    f
}

fn density_from(c: &DMatrix<f64>, n_occ: usize) -> DMatrix<f64> {
    let occ = c.columns(0, n_occ);
    2.0 * &occ * occ.transpose()
}

/// Runs Roothaan-Hall iterations with DIIS from a core-Hamiltonian guess.
///
/// Non-convergence within `max_iterations` is not an error: the last
/// iterate is returned with `converged = false`.
pub fn scf_solve(ao: &AOIntegrals, options: &ScfOptions) -> Result<ScfResult> {
    let n = ao.n_ao;
    if !ao.n_electrons.is_multiple_of(2) {
        return Err(Error::Usage(format!(
            "restricted HF needs an even electron count, got {}",
            ao.n_electrons
        )));
    }
    if ao.n_electrons > 2 * n {
        return Err(Error::Usage(format!("{} electrons do not fit in {n} basis functions", ao.n_electrons)));
    }
    let n_occ = ao.n_electrons / 2;
    let x = symmetric_orthogonalizer(&ao.overlap)?;
    let s = &ao.overlap;
    let hcore = &ao.core_hamiltonian;

    let diagonalize = |f: &DMatrix<f64>| {
        let fp = x.transpose() * f * &x;
        let (eps, cp) = sorted_eigh(&fp);
        (eps, &x * cp)
    };

    let (mut eps, mut c) = diagonalize(hcore);
    let mut density = density_from(&c, n_occ);
    let mut diis = DiisHistory::new(options.diis_capacity);
    let mut trace = Vec::new();
    let mut previous: Option<f64> = None;
    let mut energy = f64::NAN;
    let mut converged = false;
    let mut iterations = 0;

    for k in 1..=options.max_iterations {
        iterations = k;
        let f = fock_matrix(hcore, &ao.eri, &density);
        energy = 0.5 * density.component_mul(&(hcore + &f)).sum() + ao.e_nuclear;
        let error = x.transpose() * (&f * &density * s - s * &density * &f) * &x;
        let error_norm = error.amax();
        let delta = previous.map_or(f64::INFINITY, |e| energy - e);
        let step = ScfIteration {
            iteration: k,
            energy,
            delta,
            error_norm,
        };
        log::debug!("{step}");
        trace.push(step);

        if delta.abs() <= options.energy_tolerance && error_norm <= options.error_tolerance {
            converged = true;
            break;
        }
        previous = Some(energy);
        diis.push(f, error);
        let extrapolated = diis_extrapolate(&diis)?.fock;
        (eps, c) = diagonalize(&extrapolated);
        density = density_from(&c, n_occ);
    }

    if !converged {
        log::warn!("SCF not converged after {iterations} iterations");
    }
    Ok(ScfResult {
        mo_coefficients: c,
        orbital_energies: eps,
        density,
        e_hf: energy,
        iterations,
        converged,
        trace,
    })
}

/// Transforms AO integrals into the basis of the columns of `c`, one index
/// at a time.
pub fn ao_to_mo(ao: &AOIntegrals, c: &DMatrix<f64>) -> Result<MOIntegrals> {
    let n = ao.n_ao;
    if c.nrows() != n {
        return Err(Error::Usage(format!(
            "coefficient matrix has {} rows for {n} basis functions",
            c.nrows()
        )));
    }
    let m = c.ncols();
    let h = c.transpose() * &ao.core_hamiltonian * c;
    let h = (&h + h.transpose()) * 0.5;

    // g'[a,q,r,s] = Σ_p C[p,a] g[p,q,r,s], applied to each index in turn.
    // After four passes the index order is back to (a,b,c,d).
    let mut data = ao.eri.as_slice().to_vec();
    let mut dims = [n, n, n, n];
    for _ in 0..4 {
        let [d0, d1, d2, d3] = dims;
        let inner = d1 * d2 * d3;
        // transform leading index and rotate it to the back
        let mut out = vec![0.0; m * inner];
        for a in 0..m {
            for p in 0..d0 {
                let w = c[(p, a)];
                if w == 0.0 {
                    continue;
                }
                let src = &data[p * inner..(p + 1) * inner];
                let dst = &mut out[a * inner..(a + 1) * inner];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += w * s;
                }
            }
        }
        // out is [m, d1, d2, d3]; rotate to [d1, d2, d3, m]
        let mut rotated = vec![0.0; m * inner];
        for a in 0..m {
            for rest in 0..inner {
                rotated[rest * m + a] = out[a * inner + rest];
            }
        }
        data = rotated;
        dims = [d1, d2, d3, m];
    }
    let mut g = EriTensor::from_raw(m, data);
    // remove rounding asymmetry by averaging over each orbit
    let mut sym = EriTensor::zeros(m);
    for (p, q, r, s) in crate::integrals::canonical_indices(m) {
        let avg = crate::integrals::orbit(p, q, r, s)
            .iter()
            .map(|&(a, b, c, d)| g.get(a, b, c, d))
            .sum::<f64>()
            / 8.0;
        sym.set(p, q, r, s, avg);
    }
    g = sym;
    MOIntegrals::new(ao.n_electrons, h, g, ao.e_nuclear)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrals::{build_ao_integrals, Atom, BasisSet, Geometry};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ao_for(atoms: Vec<Atom>, charge: i32) -> AOIntegrals {
        let g = Geometry::new(atoms, charge).unwrap();
        build_ao_integrals(&g, &BasisSet::sto3g().for_geometry(&g).unwrap()).unwrap()
    }

    fn h2(r_bohr: f64) -> AOIntegrals {
        ao_for(
            vec![Atom::new("H", [0.0; 3]).unwrap(), Atom::new("H", [0.0, 0.0, r_bohr]).unwrap()],
            0,
        )
    }

    #[test]
    fn he_atom_converges_immediately() {
        let ao = ao_for(vec![Atom::new("He", [0.0; 3]).unwrap()], 0);
        let r = scf_solve(&ao, &ScfOptions::default()).unwrap();
        assert!(r.converged);
        assert!(r.iterations <= 3, "{} iterations", r.iterations);
        let ctsc = r.mo_coefficients.transpose() * &ao.overlap * &r.mo_coefficients;
        assert_abs_diff_eq!(ctsc[(0, 0)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_eri_energy_is_orbital_sum() {
        let mut ao = h2(1.4);
        ao.eri = EriTensor::zeros(2);
        let r = scf_solve(&ao, &ScfOptions::default()).unwrap();
        assert!(r.converged);
        let want = 2.0 * r.orbital_energies[0] + ao.e_nuclear;
        assert_abs_diff_eq!(r.e_hf, want, epsilon = 1e-10);
    }

    #[test]
    fn orthonormal_and_idempotent() {
        let ao = ao_for(
            vec![Atom::from_angstrom("Li", [0.0; 3]).unwrap(), Atom::from_angstrom("H", [0.0, 0.0, 1.6]).unwrap()],
            0,
        );
        let r = scf_solve(&ao, &ScfOptions::default()).unwrap();
        assert!(r.converged);
        let ctsc = r.mo_coefficients.transpose() * &ao.overlap * &r.mo_coefficients;
        assert!((ctsc - DMatrix::identity(3, 3)).amax() <= 1e-8);
        let dsd = &r.density * &ao.overlap * &r.density;
        assert!((dsd - 2.0 * &r.density).amax() <= 1e-6);
        assert!(r.orbital_energies.windows(2).all(|w| w[0] <= w[1]));
        let first = r.trace.first().unwrap().energy;
        assert!(r.e_hf <= first + 1e-12);
    }

    #[test]
    fn odd_electrons_and_singular_overlap_rejected() {
        let ao = ao_for(vec![Atom::new("H", [0.0; 3]).unwrap()], 0);
        assert!(matches!(scf_solve(&ao, &ScfOptions::default()), Err(Error::Usage(_))));
        let mut ao = h2(1.4);
        ao.overlap = DMatrix::from_element(2, 2, 1.0);
        assert!(matches!(scf_solve(&ao, &ScfOptions::default()), Err(Error::LinearDependence(_))));
    }

    #[test]
    fn iteration_cap_returns_partial_result() {
        let ao = h2(1.4);
        let opts = ScfOptions {
            max_iterations: 1,
            ..Default::default()
        };
        let r = scf_solve(&ao, &opts).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 1);
        assert!(r.e_hf.is_finite());
    }

    #[test]
    fn trace_line_format() {
        let line = ScfIteration {
            iteration: 3,
            energy: -1.1,
            delta: -2e-5,
            error_norm: 3e-4,
        }
        .to_string();
        assert!(line.starts_with("iter 3 E=-1.100000000000 dE="), "{line}");
        assert!(line.contains(" err="));
    }

    #[test]
    fn diis_single_and_duplicate_entries() {
        let f = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, -0.5]);
        let e = DMatrix::from_row_slice(2, 2, &[0.0, 0.1, -0.1, 0.0]);
        let mut h = DiisHistory::new(8);
        h.push(f.clone(), e.clone());
        let x = diis_extrapolate(&h).unwrap();
        assert_eq!(x.coefficients, vec![1.0]);
        assert_eq!(x.fock, f);
        h.push(f.clone(), e.clone());
        let x = diis_extrapolate(&h).unwrap();
        assert!((x.fock - &f).amax() <= 1e-14);
        assert!(matches!(diis_extrapolate(&DiisHistory::new(4)), Err(Error::Usage(_))));
    }

    #[test]
    fn diis_coefficients_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let mut h = DiisHistory::new(8);
            for _ in 0..2 {
                let f = DMatrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
                let e = DMatrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
                h.push(f, e);
            }
            let x = diis_extrapolate(&h).unwrap();
            assert_eq!(x.coefficients.len(), 2);
            assert_abs_diff_eq!(x.coefficients.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn diis_capacity_is_bounded() {
        let mut h = DiisHistory::new(3);
        for k in 0..5 {
            h.push(DMatrix::from_element(1, 1, k as f64), DMatrix::from_element(1, 1, 1.0));
        }
        assert_eq!(h.len(), 3);
        assert_eq!(h.capacity(), 3);
    }

    #[test]
    fn identity_transform_is_a_no_op() {
        let mut ao = h2(1.4);
        ao.overlap = DMatrix::identity(2, 2);
        let mo = ao_to_mo(&ao, &DMatrix::identity(2, 2)).unwrap();
        assert!((&mo.h - &ao.core_hamiltonian).amax() <= 1e-15);
        let diff = mo.g.as_slice().iter().zip(ao.eri.as_slice()).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(diff <= 1e-15);
        assert_eq!(mo.e_core, ao.e_nuclear);
        assert!(matches!(ao_to_mo(&ao, &DMatrix::identity(3, 3)), Err(Error::Usage(_))));
    }

    #[test]
    fn transform_keeps_eight_fold_symmetry() {
        let ao = ao_for(
            vec![Atom::from_angstrom("Li", [0.0; 3]).unwrap(), Atom::from_angstrom("H", [0.0, 0.0, 1.6]).unwrap()],
            0,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = DMatrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
        let q = a.qr().q();
        let mo = ao_to_mo(&ao, &q).unwrap();
        assert!(mo.g.symmetry_violation() <= 1e-10);
    }

    #[test]
    fn transform_matches_direct_sum() {
        let ao = ao_for(
            vec![Atom::from_angstrom("Li", [0.0; 3]).unwrap(), Atom::from_angstrom("H", [0.0, 0.0, 1.6]).unwrap()],
            0,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let c = DMatrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
        let mo = ao_to_mo(&ao, &c).unwrap();
        // naive n^8 reference
        let n = 3;
        for (a, b, cc, d) in [(0, 1, 2, 0), (2, 2, 1, 0), (1, 1, 1, 1)] {
            let mut want = 0.0;
            for p in 0..n {
                for q in 0..n {
                    for r in 0..n {
                        for s in 0..n {
                            want += c[(p, a)] * c[(q, b)] * c[(r, cc)] * c[(s, d)] * ao.eri.get(p, q, r, s);
                        }
                    }
                }
            }
            assert_abs_diff_eq!(mo.g.get(a, b, cc, d), want, epsilon = 1e-12);
        }
    }
}
