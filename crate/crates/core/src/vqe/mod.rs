//! Variational quantum eigensolver: ansätze, gradients, optimizers and the
//! driver loop.

mod ansatz;
mod optimize;

use std::cell::Cell;
use std::f64::consts::FRAC_PI_2;

pub use ansatz::{
    hardware_efficient_ansatz, hf_reference_circuit, uccsd_ansatz, uccsd_excitations, Ansatz, AnsatzKind, Excitation,
};
pub use optimize::{
    minimize, Method, MinimizeResult, Objective, OptimizerConfig, GD_GRADIENT_TOLERANCE, GD_STEP, NM_INITIAL_STEP,
    NM_SIMPLEX_TOLERANCE, NM_SPREAD_TOLERANCE, SPSA_A, SPSA_C, SPSA_STALL_ITERATIONS,
};

use crate::pauli::PauliSum;
use crate::statevector::{expectation, run_circuit, run_circuit_shifted, Angle};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct VQEResult {
    pub energy: f64,
    pub parameters: Vec<f64>,
    pub evaluations: usize,
    /// Best energy after each optimizer iteration.
    pub history: Vec<f64>,
    pub converged: bool,
}

fn check(h: &PauliSum, a: &Ansatz, theta: &[f64]) -> Result<()> {
    if h.n_qubits != a.n_qubits() {
        return Err(Error::Usage(format!(
            "Hamiltonian has {} qubits, ansatz {}",
            h.n_qubits,
            a.n_qubits()
        )));
    }
    if theta.len() != a.parameter_count {
        return Err(Error::Usage(format!(
            "ansatz takes {} parameters, got {}",
            a.parameter_count,
            theta.len()
        )));
    }
    Ok(())
}

/// `⟨ψ(θ)|h|ψ(θ)⟩`.
pub fn energy(h: &PauliSum, a: &Ansatz, theta: &[f64]) -> Result<f64> {
    check(h, a, theta)?;
    expectation(&run_circuit(&a.circuit, theta)?, h)
}

/// `∂E/∂θ_k = Σ_g s_g · ½[E(φ_g + π/2) − E(φ_g − π/2)]` over gates `g` with
/// angle `s_g θ_k`.
pub fn parameter_shift_gradient(a: &Ansatz, h: &PauliSum, theta: &[f64]) -> Result<Vec<f64>> {
    Ok(shift_gradient(a, h, theta)?.0)
}

fn shift_gradient(a: &Ansatz, h: &PauliSum, theta: &[f64]) -> Result<(Vec<f64>, usize)> {
    check(h, a, theta)?;
    let mut grad = vec![0.0; a.parameter_count];
    let mut cost = 0;
    for (k, gate) in a.circuit.gates.iter().enumerate() {
        if let Some(Angle::Param { slot, scale }) = gate.angle() {
            let plus = expectation(&run_circuit_shifted(&a.circuit, theta, Some((k, FRAC_PI_2)))?, h)?;
            let minus = expectation(&run_circuit_shifted(&a.circuit, theta, Some((k, -FRAC_PI_2)))?, h)?;
            grad[*slot] += scale * 0.5 * (plus - minus);
            cost += 2;
        }
    }
    Ok((grad, cost))
}

struct EnergyObjective<'a> {
    h: &'a PauliSum,
    ansatz: &'a Ansatz,
    count: Cell<usize>,
}

impl Objective for EnergyObjective<'_> {
    fn value(&self, theta: &[f64]) -> f64 {
        let e = energy(self.h, self.ansatz, theta).expect("inputs validated");
        let k = self.count.get() + 1;
        self.count.set(k);
        log::info!("eval {k} E={e:.12}");
        e
    }

    fn gradient(&self, theta: &[f64]) -> (Vec<f64>, usize) {
        shift_gradient(self.ansatz, self.h, theta).expect("inputs validated")
    }
}

/// Minimizes the ansatz energy from `θ = 0`.
pub fn vqe_solve(h: &PauliSum, ansatz: &Ansatz, config: &OptimizerConfig) -> Result<VQEResult> {
    vqe_solve_from(h, ansatz, &vec![0.0; ansatz.parameter_count], config)
}

/// Like [`vqe_solve`] with an explicit starting point.
pub fn vqe_solve_from(h: &PauliSum, ansatz: &Ansatz, theta0: &[f64], config: &OptimizerConfig) -> Result<VQEResult> {
    let theta0 = theta0.to_vec();
    check(h, ansatz, &theta0)?;
    ansatz.circuit.validate()?;
    let objective = EnergyObjective {
        h,
        ansatz,
        count: Cell::new(0),
    };
    let result = if h.is_constant() {
        // energy does not depend on θ
        let e = objective.value(&theta0);
        MinimizeResult {
            theta: theta0,
            value: e,
            evaluations: 1,
            history: vec![e],
            converged: true,
        }
    } else {
        minimize(&objective, &theta0, config)?
    };
    Ok(VQEResult {
        energy: result.value,
        parameters: result.theta,
        evaluations: result.evaluations,
        history: result.history,
        converged: result.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{PauliString, PauliTerm};
    use crate::statevector::{Circuit, Gate};
    use approx::assert_abs_diff_eq;

    fn z0() -> PauliSum {
        PauliSum::from_terms(1, vec![PauliTerm::new(1.0, PauliString::parse_pattern("Z").unwrap())])
    }

    fn ry_ansatz() -> Ansatz {
        let mut circuit = Circuit::new(1);
        circuit.push(Gate::Ry(0, Angle::param(0)));
        Ansatz {
            circuit,
            parameter_count: 1,
            kind: AnsatzKind::HardwareEfficient { depth: 0 },
        }
    }

    #[test]
    fn single_qubit_minimum() {
        let r = vqe_solve(&z0(), &ry_ansatz(), &OptimizerConfig::default()).unwrap();
        assert_abs_diff_eq!(r.energy, -1.0, epsilon = 1e-6);
        assert_eq!(r.energy, energy(&z0(), &ry_ansatz(), &r.parameters).unwrap());
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn constant_hamiltonian_takes_one_evaluation() {
        let h = PauliSum::from_terms(1, vec![PauliTerm::new(-0.25, PauliString::IDENTITY)]);
        let r = vqe_solve(&h, &ry_ansatz(), &OptimizerConfig::default()).unwrap();
        assert_eq!(r.energy, -0.25);
        assert_eq!(r.evaluations, 1);
    }

    #[test]
    fn qubit_mismatch_is_usage_error() {
        let h = PauliSum::new(2);
        assert!(matches!(vqe_solve(&h, &ry_ansatz(), &OptimizerConfig::default()), Err(Error::Usage(_))));
    }

    #[test]
    fn idle_parameter_has_zero_gradient() {
        // RZ on |0⟩ only adds a phase
        let mut circuit = Circuit::new(1);
        circuit.push(Gate::Rz(0, Angle::param(0))).push(Gate::Ry(0, Angle::param(1)));
        let a = Ansatz {
            circuit,
            parameter_count: 2,
            kind: AnsatzKind::HardwareEfficient { depth: 0 },
        };
        let g = parameter_shift_gradient(&a, &z0(), &[0.7, 0.3]).unwrap();
        assert!(g[0].abs() <= 1e-12);
        assert_abs_diff_eq!(g[1], -(0.3f64).sin(), epsilon = 1e-12);
    }

    #[test]
    fn shared_slot_gradient_sums_over_gates() {
        let mut circuit = Circuit::new(1);
        circuit
            .push(Gate::Ry(0, Angle::Param { slot: 0, scale: 0.5 }))
            .push(Gate::Ry(0, Angle::Param { slot: 0, scale: 1.5 }));
        let a = Ansatz {
            circuit,
            parameter_count: 1,
            kind: AnsatzKind::HardwareEfficient { depth: 0 },
        };
        // E = cos(2θ)
        let g = parameter_shift_gradient(&a, &z0(), &[0.4]).unwrap();
        assert_abs_diff_eq!(g[0], -2.0 * (0.8f64).sin(), epsilon = 1e-12);
    }
}
