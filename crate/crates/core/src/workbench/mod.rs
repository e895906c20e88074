//! Bond-length scans, the energy database and curve output.

mod curve;
mod db;
mod scan;

pub use curve::{emit_curve, parse_curve, CurvePoint, CURVE_HEADER};
pub use db::{AuditReport, Database, HamiltonianRef, IndexEntry, Query};
pub use scan::{
    bond_length_range, run_scan, AnsatzChoice, EnergyRecord, IntegralSource, MethodMetadata, MethodSet,
    MoleculeTemplate, RecordAtom, ScanFailure, ScanReport, ScanSpec, VqeSettings,
};

use crate::exact::electronic_ground_energy;
use crate::fermion::{build_fermionic_hamiltonian, freeze_core, FermionOperator};
use crate::integrals::{build_ao_integrals, BasisSet, Geometry};
use crate::integrals_io::MOIntegrals;
use crate::pauli::{jordan_wigner, PauliSum};
use crate::scf::{ao_to_mo, scf_solve, ScfOptions};
use crate::vqe::vqe_solve;
use crate::{Error, Result};

/// Everything derived from one set of integrals.
#[derive(Debug, Clone)]
pub struct Problem {
    pub mo: MOIntegrals,
    pub e_hf: f64,
    pub fermion: FermionOperator,
    pub qubit: PauliSum,
}

impl Problem {
    /// Integrals → RHF → MO integrals → Hamiltonians.
    pub fn from_geometry(geometry: &Geometry, basis: &BasisSet, options: &ScfOptions) -> Result<Self> {
        let functions = basis.for_geometry(geometry)?;
        let ao = build_ao_integrals(geometry, &functions)?;
        let scf = scf_solve(&ao, options)?;
        if !scf.converged {
            return Err(Error::Domain(format!("SCF not converged after {} iterations", scf.iterations)));
        }
        let mo = ao_to_mo(&ao, &scf.mo_coefficients)?;
        Ok(Self::with_energy(mo, scf.e_hf))
    }

    /// Takes the HF energy as the reference-determinant energy of `mo`.
    pub fn from_mo(mo: MOIntegrals) -> Self {
        let e_hf = mo.reference_energy();
        Self::with_energy(mo, e_hf)
    }

    fn with_energy(mo: MOIntegrals, e_hf: f64) -> Self {
        let fermion = build_fermionic_hamiltonian(&mo);
        let qubit = jordan_wigner(&fermion);
        Self { mo, e_hf, fermion, qubit }
    }

    /// Freezes the `n_frozen` lowest orbitals; `e_hf` carries over.
    pub fn frozen(&self, n_frozen: usize) -> Result<Self> {
        if n_frozen == 0 {
            return Ok(self.clone());
        }
        let mo = freeze_core(&self.mo, n_frozen)?;
        Ok(Self::with_energy(mo, self.e_hf))
    }

    pub fn n_qubits(&self) -> usize {
        self.qubit.n_qubits
    }

    pub fn exact_energy(&self) -> Result<f64> {
        Ok(electronic_ground_energy(&self.qubit, self.mo.n_electrons)?.ground_energy)
    }
}

/// Energies produced by one [`solve`] call.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Energies {
    pub e_hf: Option<f64>,
    pub e_vqe: Option<f64>,
    pub e_exact: Option<f64>,
    pub evaluations: Option<usize>,
}

pub fn solve(problem: &Problem, methods: MethodSet, vqe: &VqeSettings) -> Result<Energies> {
    let mut out = Energies::default();
    if methods.hf {
        out.e_hf = Some(problem.e_hf);
    }
    if methods.vqe {
        let ansatz = vqe.ansatz.build(problem.n_qubits(), problem.mo.n_electrons)?;
        let r = vqe_solve(&problem.qubit, &ansatz, &vqe.optimizer)?;
        out.e_vqe = Some(r.energy);
        out.evaluations = Some(r.evaluations);
    }
    if methods.exact {
        out.e_exact = Some(problem.exact_energy()?);
    }
    Ok(out)
}
