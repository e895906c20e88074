use std::f64::consts::FRAC_PI_2;
use std::fmt;

use crate::fermion::{FermionOperator, FermionTerm, Ladder};
use crate::pauli::{jordan_wigner, Pauli, PauliString};
use crate::statevector::{Angle, Circuit, Gate};
use crate::{Error, Result};

/// A spin-orbital excitation `occupied → virtuals` (one or two of each).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Excitation {
    pub from: Vec<usize>,
    pub to: Vec<usize>,
}

impl Excitation {
    /// Generator `T − T†` with `T = a†_{to…} a_{from…}`.
    fn generator(&self, n_modes: usize) -> FermionOperator {
        let mut factors: Vec<Ladder> = self.to.iter().rev().map(|&p| Ladder::create(p)).collect();
        factors.extend(self.from.iter().map(|&p| Ladder::annihilate(p)));
        let t = FermionTerm::new(1.0, factors);
        let mut op = FermionOperator::new(n_modes);
        let adj = t.adjoint();
        op.terms.push(t);
        op.terms.push(FermionTerm::new(-adj.coefficient, adj.factors));
        op
    }
}

impl fmt::Display for Excitation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[usize]| v.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "{}->{}", list(&self.from), list(&self.to))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnsatzKind {
    HardwareEfficient { depth: usize },
    Uccsd { excitations: Vec<Excitation> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ansatz {
    pub circuit: Circuit,
    pub parameter_count: usize,
    pub kind: AnsatzKind,
}

impl Ansatz {
    /// Short label stored alongside results, e.g. `hea(depth=2)` or `uccsd`.
    pub fn label(&self) -> String {
        match &self.kind {
            AnsatzKind::HardwareEfficient { depth } => format!("hea(depth={depth})"),
            AnsatzKind::Uccsd { .. } => "uccsd".to_string(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.circuit.n_qubits
    }
}

fn check_closed_shell(n_qubits: usize, n_electrons: usize) -> Result<()> {
    if !n_electrons.is_multiple_of(2) {
        return Err(Error::Usage(format!("{n_electrons} electrons is not a closed shell")));
    }
    if !n_qubits.is_multiple_of(2) {
        return Err(Error::Usage(format!("{n_qubits} qubits cannot hold two spin blocks")));
    }
    if n_electrons > n_qubits {
        return Err(Error::Usage(format!("{n_electrons} electrons do not fit in {n_qubits} spin orbitals")));
    }
    Ok(())
}

/// X gates on the lowest `n_electrons/2` qubits of each spin block.
pub fn hf_reference_circuit(n_qubits: usize, n_electrons: usize) -> Result<Circuit> {
    check_closed_shell(n_qubits, n_electrons)?;
    let half = n_qubits / 2;
    let mut c = Circuit::new(n_qubits);
    for q in (0..n_electrons / 2).chain(half..half + n_electrons / 2) {
        c.push(Gate::X(q));
    }
    Ok(c)
}

/// HF prefix, `depth` layers of `[RY on every qubit; CZ chain]`, then a
/// final RY layer.
pub fn hardware_efficient_ansatz(n_qubits: usize, n_electrons: usize, depth: usize) -> Result<Ansatz> {
    let mut circuit = hf_reference_circuit(n_qubits, n_electrons)?;
    let mut slot = 0;
    for layer in 0..=depth {
        for q in 0..n_qubits {
            circuit.push(Gate::Ry(q, Angle::param(slot)));
            slot += 1;
        }
        if layer < depth {
            for q in 0..n_qubits.saturating_sub(1) {
                circuit.push(Gate::Cz(q, q + 1));
            }
        }
    }
    Ok(Ansatz {
        circuit,
        parameter_count: slot,
        kind: AnsatzKind::HardwareEfficient { depth },
    })
}

/// Spin-conserving singles and doubles from the closed-shell reference.
pub fn uccsd_excitations(n_qubits: usize, n_electrons: usize) -> Result<Vec<Excitation>> {
    check_closed_shell(n_qubits, n_electrons)?;
    let half = n_qubits / 2;
    let n_occ = n_electrons / 2;
    if n_occ == half {
        return Err(Error::Usage("no virtual orbitals to excite into".into()));
    }
    let occ = |spin: usize| (0..n_occ).map(move |i| i + spin * half);
    let virt = |spin: usize| (n_occ..half).map(move |a| a + spin * half);

    let mut out = Vec::new();
    for spin in 0..2 {
        for i in occ(spin) {
            for a in virt(spin) {
                out.push(Excitation { from: vec![i], to: vec![a] });
            }
        }
    }
    for spin in 0..2 {
        for i in occ(spin) {
            for j in occ(spin).filter(|&j| j > i) {
                for a in virt(spin) {
                    for b in virt(spin).filter(|&b| b > a) {
                        out.push(Excitation { from: vec![i, j], to: vec![a, b] });
                    }
                }
            }
        }
    }
    for i in occ(0) {
        for j in occ(1) {
            for a in virt(0) {
                for b in virt(1) {
                    out.push(Excitation { from: vec![i, j], to: vec![a, b] });
                }
            }
        }
    }
    Ok(out)
}

/// HF prefix followed by `exp(θ_k (T_k − T_k†))` for every excitation, each
/// compiled string by string as basis change, CNOT staircase, RZ, uncompute.
pub fn uccsd_ansatz(n_qubits: usize, n_electrons: usize) -> Result<Ansatz> {
    let excitations = uccsd_excitations(n_qubits, n_electrons)?;
    let mut circuit = hf_reference_circuit(n_qubits, n_electrons)?;
    for (slot, ex) in excitations.iter().enumerate() {
        // JW(T − T†) = i Σ c_j P_j, all P_j mutually commuting
        let image = jordan_wigner(&ex.generator(n_qubits));
        for term in &image.terms {
            let c = term.coefficient.im;
            if c.abs() < 1e-14 {
                continue;
            }
            append_pauli_rotation(&mut circuit, &term.string, Angle::Param { slot, scale: -2.0 * c });
        }
    }
    Ok(Ansatz {
        circuit,
        parameter_count: excitations.len(),
        kind: AnsatzKind::Uccsd { excitations },
    })
}

/// Appends `exp(−i φ/2 P)`, `φ` given by `angle`.
fn append_pauli_rotation(c: &mut Circuit, p: &PauliString, angle: Angle) {
    let letters: Vec<(usize, Pauli)> = p.letters().collect();
    for &(q, l) in &letters {
        match l {
            Pauli::X => {
                c.push(Gate::Ry(q, Angle::Fixed(-FRAC_PI_2)));
            }
            Pauli::Y => {
                c.push(Gate::Rz(q, Angle::Fixed(-FRAC_PI_2)));
                c.push(Gate::Ry(q, Angle::Fixed(-FRAC_PI_2)));
            }
            Pauli::Z => {}
        }
    }
    for w in letters.windows(2) {
        c.push(Gate::Cnot { control: w[0].0, target: w[1].0 });
    }
    let last = letters.last().expect("non-identity string").0;
    c.push(Gate::Rz(last, angle));
    for w in letters.windows(2).rev() {
        c.push(Gate::Cnot { control: w[0].0, target: w[1].0 });
    }
    for &(q, l) in letters.iter().rev() {
        match l {
            Pauli::X => {
                c.push(Gate::Ry(q, Angle::Fixed(FRAC_PI_2)));
            }
            Pauli::Y => {
                c.push(Gate::Ry(q, Angle::Fixed(FRAC_PI_2)));
                c.push(Gate::Rz(q, Angle::Fixed(FRAC_PI_2)));
            }
            Pauli::Z => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{PauliSum, PauliTerm};
    use crate::statevector::{expectation, run_circuit, Statevector};
    use approx::assert_abs_diff_eq;

    #[test]
    fn hf_circuit_layout() {
        let c = hf_reference_circuit(4, 2).unwrap();
        assert_eq!(c.gates, vec![Gate::X(0), Gate::X(2)]);
        assert!(hf_reference_circuit(4, 0).unwrap().gates.is_empty());
        assert!(matches!(hf_reference_circuit(4, 3), Err(Error::Usage(_))));
    }

    #[test]
    fn parameter_counts() {
        assert_eq!(hardware_efficient_ansatz(4, 2, 2).unwrap().parameter_count, 12);
        let u = uccsd_ansatz(4, 2).unwrap();
        assert_eq!(u.parameter_count, 3);
        assert_eq!(u.circuit.parameter_count(), 3);
        u.circuit.validate().unwrap();
        assert!(matches!(uccsd_ansatz(4, 4), Err(Error::Usage(_))));
        // 4 spatial, 4 electrons: 2·2·2 singles, 2 same-spin doubles per spin, 16 mixed
        assert_eq!(uccsd_excitations(8, 4).unwrap().len(), 8 + 2 + 16);
    }

    #[test]
    fn zero_parameters_give_hf_state() {
        let hf = Statevector::basis_state(4, 0b0101).unwrap();
        for a in [hardware_efficient_ansatz(4, 2, 2).unwrap(), uccsd_ansatz(4, 2).unwrap()] {
            let s = run_circuit(&a.circuit, &vec![0.0; a.parameter_count]).unwrap();
            assert_abs_diff_eq!(s.inner(&hf).norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn pauli_rotation_matches_closed_form() {
        // exp(−iφ/2 P)|ψ⟩ = cos(φ/2)|ψ⟩ − i sin(φ/2) P|ψ⟩
        let phi = 0.37;
        for pattern in ["XY", "YZX", "ZZ", "YIY", "X"] {
            let p = PauliString::parse_pattern(pattern).unwrap();
            let n = pattern.len();
            let mut prep = Circuit::new(n);
            for q in 0..n {
                prep.push(Gate::Ry(q, Angle::Fixed(0.3 + q as f64)));
                prep.push(Gate::Rz(q, Angle::Fixed(0.7 * q as f64)));
            }
            let psi = run_circuit(&prep, &[]).unwrap();
            let mut full = prep.clone();
            append_pauli_rotation(&mut full, &p, Angle::Fixed(phi));
            let out = run_circuit(&full, &[]).unwrap();
            for i in 0..psi.amplitudes.len() {
                // P|k⟩ = phase·|i⟩ with k = i ^ x
                let k = i ^ p.x as usize;
                let (_, phase) = p.apply_to_basis(k);
                let expected = psi.amplitudes[i] * (0.5 * phi).cos()
                    - num_complex::Complex64::i() * (0.5 * phi).sin() * phase * psi.amplitudes[k];
                assert_abs_diff_eq!((out.amplitudes[i] - expected).norm(), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn single_excitation_rotates_occupation() {
        // exp(θ(a†_1 a_0 − h.c.)) on |1⟩ (2 modes) moves amplitude into |2⟩
        let ex = Excitation { from: vec![0], to: vec![1] };
        let image = jordan_wigner(&ex.generator(2));
        let mut c = Circuit::new(2);
        c.push(Gate::X(0));
        for t in &image.terms {
            append_pauli_rotation(&mut c, &t.string, Angle::Param { slot: 0, scale: -2.0 * t.coefficient.im });
        }
        let theta = 0.4;
        let s = run_circuit(&c, &[theta]).unwrap();
        assert_abs_diff_eq!(s.amplitudes[1].norm(), theta.cos(), epsilon = 1e-12);
        assert_abs_diff_eq!(s.amplitudes[2].norm(), theta.sin(), epsilon = 1e-12);
        let n1 = PauliSum::from_terms(2, vec![PauliTerm::new(0.5, PauliString::IDENTITY), PauliTerm::new(-0.5, PauliString::parse_pattern("IZ").unwrap())]);
        assert_abs_diff_eq!(expectation(&s, &n1).unwrap(), theta.sin().powi(2), epsilon = 1e-12);
    }
}
