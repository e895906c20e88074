//! Ground-state energy workbench.
//!
//! The pipeline runs geometry → AO integrals ([`integrals`]) → restricted
//! Hartree-Fock ([`scf`]) → MO integrals ([`integrals_io::MOIntegrals`]) →
//! second-quantized Hamiltonian ([`fermion`]) → Jordan-Wigner qubit
//! Hamiltonian ([`pauli`]). The qubit Hamiltonian is then solved by VQE on the
//! built-in statevector simulator ([`vqe`], [`statevector`]) or by exact
//! diagonalization ([`exact`]). [`workbench`] drives bond-length scans and
//! persists every energy and Hamiltonian in a file-backed database.
//!
//! Energies are in Hartree and internal lengths in Bohr. User-facing geometry
//! is given in Ångström.

pub mod error;
pub mod exact;
pub mod fermion;
pub mod integrals;
pub mod integrals_io;
pub mod pauli;
pub mod scf;
pub mod statevector;
pub mod vqe;
pub mod workbench;

mod format;

pub use error::{Error, Result};
