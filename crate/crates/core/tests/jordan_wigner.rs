//! Jordan–Wigner images against a direct occupation-number representation.

use groundstate::fermion::{FermionOperator, FermionTerm, Ladder, LadderKind};
use groundstate::pauli::{jordan_wigner, qwc_group, PauliSum};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Matrix of `op` on occupation states `|n_{k-1} … n_0⟩`, bit `p` = mode `p`,
/// with `a_p` picking up `(−1)^{#occupied modes below p}`.
fn occupation_matrix(op: &FermionOperator) -> DMatrix<Complex64> {
    let dim = 1usize << op.n_modes;
    let mut m = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        m[(i, i)] += Complex64::new(op.constant, 0.0);
        'term: for t in &op.terms {
            let mut state = i;
            let mut sign = 1.0;
            for f in t.factors.iter().rev() {
                let bit = 1usize << f.mode;
                let occupied = state & bit != 0;
                match f.kind {
                    LadderKind::Annihilation if !occupied => continue 'term,
                    LadderKind::Creation if occupied => continue 'term,
                    _ => {}
                }
                if (state & (bit - 1)).count_ones() % 2 == 1 {
                    sign = -sign;
                }
                state ^= bit;
            }
            m[(state, i)] += t.coefficient * sign;
        }
    }
    m
}

fn pauli_matrix(s: &PauliSum) -> DMatrix<Complex64> {
    let dim = 1usize << s.n_qubits;
    let mut m = DMatrix::zeros(dim, dim);
    for t in &s.terms {
        for i in 0..dim {
            let (j, phase) = t.string.apply_to_basis(i);
            m[(j, i)] += t.coefficient * phase;
        }
    }
    m
}

fn random_hermitian(n_modes: usize, rng: &mut ChaCha8Rng) -> FermionOperator {
    let mut op = FermionOperator::new(n_modes);
    op.constant = rng.random_range(-1.0..1.0);
    for _ in 0..rng.random_range(1..6) {
        let len = rng.random_range(1..=4);
        let factors = (0..len)
            .map(|_| {
                let mode = rng.random_range(0..n_modes);
                if rng.random::<bool>() { Ladder::create(mode) } else { Ladder::annihilate(mode) }
            })
            .collect();
        let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let t = FermionTerm::new(c, factors);
        let adj = t.adjoint();
        op.push(t).unwrap();
        op.push(adj).unwrap();
    }
    op
}

fn spectrum(m: DMatrix<Complex64>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn image_equals_occupation_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..40 {
        let op = random_hermitian(2 + trial % 2, &mut rng);
        let a = occupation_matrix(&op);
        let b = pauli_matrix(&jordan_wigner(&op));
        let diff = (&a - &b).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff <= 1e-12, "trial {trial}: max diff {diff}");
        for (x, y) in spectrum(a).iter().zip(spectrum(b)) {
            assert!((x - y).abs() <= 1e-9);
        }
    }
}

#[test]
fn anticommutation_relations() {
    let n = 4;
    let single = |l: Ladder| {
        let mut op = FermionOperator::new(n);
        op.push(FermionTerm::new(1.0, vec![l])).unwrap();
        jordan_wigner(&op)
    };
    for p in 0..n {
        for q in 0..n {
            let ap = single(Ladder::annihilate(p));
            let cq = single(Ladder::create(q));
            let anti = ap.multiply(&cq).add(&cq.multiply(&ap));
            let expected = if p == q { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            assert!((anti.identity_coefficient() - expected).norm() < 1e-15, "{p},{q}");
            assert!(anti.terms.iter().all(|t| t.string.is_identity() || t.coefficient.norm() < 1e-15));
            let aq = single(Ladder::annihilate(q));
            let both = ap.multiply(&aq).add(&aq.multiply(&ap));
            assert!(both.terms.iter().all(|t| t.coefficient.norm() < 1e-15));
        }
    }
}

#[test]
fn qwc_groups_commute_as_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let op = random_hermitian(3, &mut rng);
    let h = jordan_wigner(&op);
    let groups = qwc_group(&h);
    let total: usize = groups.iter().map(Vec::len).sum();
    assert_eq!(total, h.terms.len());
    for g in &groups {
        for a in g {
            for b in g {
                let ma = pauli_matrix(&PauliSum::from_terms(3, vec![*a]));
                let mb = pauli_matrix(&PauliSum::from_terms(3, vec![*b]));
                let comm = &ma * &mb - &mb * &ma;
                assert!(comm.iter().all(|z| z.norm() < 1e-12));
            }
        }
    }
}
