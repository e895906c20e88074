use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::db::{Database, HamiltonianRef};
use super::{solve, Problem};
use crate::integrals::{Atom, BasisSet, Geometry};
use crate::integrals_io::parse_fcidump;
use crate::scf::ScfOptions;
use crate::vqe::{hardware_efficient_ansatz, uccsd_ansatz, Ansatz, OptimizerConfig};
use crate::{Error, Result};

/// Two rigid fragments; fragment B is displaced by `r · axis` (Å).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoleculeTemplate {
    pub fragment_a: Vec<(String, [f64; 3])>,
    pub fragment_b: Vec<(String, [f64; 3])>,
    pub axis: [f64; 3],
    pub charge: i32,
}

impl MoleculeTemplate {
    /// Atom `a` at the origin and atom `b` on the z axis.
    pub fn diatomic(a: &str, b: &str, charge: i32) -> Self {
        Self {
            fragment_a: vec![(a.to_string(), [0.0; 3])],
            fragment_b: vec![(b.to_string(), [0.0; 3])],
            axis: [0.0, 0.0, 1.0],
            charge,
        }
    }

    /// Parses `A-B`, e.g. `H-H` or `He-H`.
    pub fn parse_pair(text: &str, charge: i32) -> Result<Self> {
        match text.split_once('-') {
            Some((a, b)) if !a.is_empty() && !b.is_empty() => Ok(Self::diatomic(a.trim(), b.trim(), charge)),
            _ => Err(Error::Usage(format!("expected a pair like H-H, got '{text}'"))),
        }
    }

    pub fn geometry(&self, bond_length: f64) -> Result<Geometry> {
        let norm = self.axis.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Usage("bond axis has zero length".into()));
        }
        let mut atoms = Vec::new();
        for (sym, pos) in &self.fragment_a {
            atoms.push(Atom::from_angstrom(sym, *pos)?);
        }
        for (sym, pos) in &self.fragment_b {
            let shifted = [0, 1, 2].map(|k| pos[k] + bond_length * self.axis[k] / norm);
            atoms.push(Atom::from_angstrom(sym, shifted)?);
        }
        Geometry::new(atoms, self.charge)
    }
}

/// Where each point's integrals come from.
#[derive(Debug, Clone, PartialEq)]
pub enum IntegralSource {
    /// A basis name (`sto-3g`) or basis file path.
    Basis(String),
    /// FCIDUMP path pattern; `{r}` becomes the bond length with two decimals.
    Fcidump { pattern: String, label: String },
}

impl IntegralSource {
    pub fn label(&self) -> String {
        match self {
            IntegralSource::Basis(name) => name.to_ascii_lowercase(),
            IntegralSource::Fcidump { label, .. } => label.clone(),
        }
    }

    pub fn fcidump_path(pattern: &str, bond_length: f64) -> PathBuf {
        PathBuf::from(pattern.replace("{r}", &format!("{bond_length:.2}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MethodSet {
    pub hf: bool,
    pub vqe: bool,
    pub exact: bool,
}

impl MethodSet {
    pub const ALL: MethodSet = MethodSet {
        hf: true,
        vqe: true,
        exact: true,
    };

    pub fn names(&self) -> Vec<String> {
        [(self.hf, "hf"), (self.vqe, "vqe"), (self.exact, "exact")]
            .into_iter()
            .filter(|(on, _)| *on)
            .map(|(_, n)| n.to_string())
            .collect()
    }
}

impl FromStr for MethodSet {
    type Err = Error;

    /// Comma-separated subset of `hf,vqe,exact`.
    fn from_str(s: &str) -> Result<Self> {
        let mut m = MethodSet::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "hf" => m.hf = true,
                "vqe" => m.vqe = true,
                "exact" => m.exact = true,
                _ => return Err(Error::Usage(format!("unknown method '{part}'"))),
            }
        }
        if m == MethodSet::default() {
            return Err(Error::Usage("empty method set".into()));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnsatzChoice {
    Uccsd,
    HardwareEfficient { depth: usize },
}

impl AnsatzChoice {
    /// `uccsd` or `hea` (with `depth`).
    pub fn parse(name: &str, depth: usize) -> Result<Self> {
        match name {
            "uccsd" => Ok(AnsatzChoice::Uccsd),
            "hea" => Ok(AnsatzChoice::HardwareEfficient { depth }),
            _ => Err(Error::Usage(format!("unknown ansatz '{name}' (expected hea or uccsd)"))),
        }
    }

    pub fn build(&self, n_qubits: usize, n_electrons: usize) -> Result<Ansatz> {
        match *self {
            AnsatzChoice::Uccsd => uccsd_ansatz(n_qubits, n_electrons),
            AnsatzChoice::HardwareEfficient { depth } => hardware_efficient_ansatz(n_qubits, n_electrons, depth),
        }
    }
}

impl fmt::Display for AnsatzChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnsatzChoice::Uccsd => f.write_str("uccsd"),
            AnsatzChoice::HardwareEfficient { depth } => write!(f, "hea(depth={depth})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VqeSettings {
    pub ansatz: AnsatzChoice,
    pub optimizer: OptimizerConfig,
}

impl Default for VqeSettings {
    fn default() -> Self {
        Self {
            ansatz: AnsatzChoice::Uccsd,
            optimizer: OptimizerConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSpec {
    pub template: MoleculeTemplate,
    /// Å, strictly ascending, each in (0, 10].
    pub bond_lengths: Vec<f64>,
    pub source: IntegralSource,
    pub methods: MethodSet,
    pub vqe: VqeSettings,
    pub frozen_core: usize,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl ScanSpec {
    pub fn validate(&self) -> Result<()> {
        if self.bond_lengths.is_empty() {
            return Err(Error::Usage("scan needs at least one bond length".into()));
        }
        if let Some(r) = self.bond_lengths.iter().find(|r| !(**r > 0.0 && **r <= 10.0)) {
            return Err(Error::Usage(format!("bond length {r} outside (0, 10] Å")));
        }
        if self.bond_lengths.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Usage("bond lengths must be strictly ascending".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Usage("worker count must be positive".into()));
        }
        Ok(())
    }
}

/// `start, start+step, …` up to `stop` inclusive, rounded to 10 decimals.
pub fn bond_length_range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || stop < start {
        return Err(Error::Usage(format!("bad range {start}..{stop} step {step}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..n)
        .map(|k| ((start + k as f64 * step) * 1e10).round() / 1e10)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordAtom {
    pub symbol: String,
    pub position_bohr: [f64; 3],
}

/// Inputs that determine how the energies were computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodMetadata {
    pub methods: Vec<String>,
    pub ansatz: Option<String>,
    pub optimizer: Option<String>,
    pub budget: Option<usize>,
    pub seed: Option<u64>,
    pub frozen_core: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub record_id: String,
    pub molecule: String,
    pub bond_length_angstrom: f64,
    pub geometry: Vec<RecordAtom>,
    pub charge: i32,
    pub basis: String,
    pub n_qubits: usize,
    pub e_hf: Option<f64>,
    pub e_vqe: Option<f64>,
    pub e_exact: Option<f64>,
    pub hamiltonian_ref: Option<HamiltonianRef>,
    pub method: MethodMetadata,
    pub evaluations: Option<usize>,
    pub created_at: DateTime<Utc>,
}

impl EnergyRecord {
    /// First 16 hex digits of SHA-256 over (molecule, geometry, basis, method).
    pub fn compute_id(molecule: &str, geometry: &[RecordAtom], basis: &str, method: &MethodMetadata) -> String {
        #[derive(Serialize)]
        struct Key<'a> {
            molecule: &'a str,
            geometry: &'a [RecordAtom],
            basis: &'a str,
            method: &'a MethodMetadata,
        }
        let key = serde_json::to_vec(&Key {
            molecule,
            geometry,
            basis,
            method,
        })
        .expect("serializable key");
        let digest = Sha256::digest(&key);
        hex::encode(&digest[..8])
    }

    /// Pretty-printed JSON, the on-disk record format.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable record")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))
    }

    pub fn expected_id(&self) -> String {
        Self::compute_id(&self.molecule, &self.geometry, &self.basis, &self.method)
    }

    /// `e_hf` and `e_vqe` are at or above `e_exact − slack` when present.
    pub fn satisfies_variational_bounds(&self, slack: f64) -> bool {
        let Some(exact) = self.e_exact else { return true };
        [self.e_hf, self.e_vqe].into_iter().flatten().all(|e| e >= exact - slack)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanFailure {
    pub bond_length: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    /// Ascending by bond length.
    pub records: Vec<EnergyRecord>,
    pub failures: Vec<ScanFailure>,
}

/// Runs every point of `spec`, in parallel, persisting each record to `db`
/// when given. Failed points are reported, not fatal, unless all fail.
pub fn run_scan(spec: &ScanSpec, db: Option<&Database>) -> Result<ScanReport> {
    spec.validate()?;
    let basis = match &spec.source {
        IntegralSource::Basis(name) => Some(BasisSet::load(name)?),
        IntegralSource::Fcidump { .. } => None,
    };
    let run = || -> Vec<Result<EnergyRecord>> {
        spec.bond_lengths
            .par_iter()
            .map(|&r| scan_point(spec, basis.as_ref(), r, db))
            .collect()
    };
    let results = match spec.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Resource(format!("cannot start worker pool: {e}")))?
            .install(run),
        None => run(),
    };

    let mut report = ScanReport {
        records: Vec::new(),
        failures: Vec::new(),
    };
    for (r, res) in spec.bond_lengths.iter().zip(results) {
        match res {
            Ok(rec) => report.records.push(rec),
            Err(e) => {
                log::warn!("scan point {r} Å failed: {e}");
                report.failures.push(ScanFailure {
                    bond_length: *r,
                    message: e.to_string(),
                });
            }
        }
    }
    if report.records.is_empty() {
        let first = &report.failures[0];
        return Err(Error::Scan(format!(
            "all {} points failed; first at {} Å: {}",
            report.failures.len(),
            first.bond_length,
            first.message
        )));
    }
    Ok(report)
}

fn scan_point(spec: &ScanSpec, basis: Option<&BasisSet>, r: f64, db: Option<&Database>) -> Result<EnergyRecord> {
    let geometry = spec.template.geometry(r)?;
    let problem = match (&spec.source, basis) {
        (IntegralSource::Basis(_), Some(b)) => Problem::from_geometry(&geometry, b, &ScfOptions::default())?,
        (IntegralSource::Fcidump { pattern, .. }, _) => {
            let path = IntegralSource::fcidump_path(pattern, r);
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            Problem::from_mo(parse_fcidump(&text)?)
        }
        (IntegralSource::Basis(_), None) => unreachable!("basis loaded up front"),
    };
    let problem = problem.frozen(spec.frozen_core)?;
    let energies = solve(&problem, spec.methods, &spec.vqe)?;

    let atoms: Vec<RecordAtom> = geometry
        .atoms
        .iter()
        .map(|a| RecordAtom {
            symbol: a.symbol.clone(),
            position_bohr: a.position,
        })
        .collect();
    let method = MethodMetadata {
        methods: spec.methods.names(),
        ansatz: spec.methods.vqe.then(|| spec.vqe.ansatz.to_string()),
        optimizer: spec.methods.vqe.then(|| spec.vqe.optimizer.method.to_string()),
        budget: spec.methods.vqe.then_some(spec.vqe.optimizer.budget),
        seed: spec.methods.vqe.then_some(spec.vqe.optimizer.seed),
        frozen_core: spec.frozen_core,
    };
    let molecule = geometry.formula();
    let basis_label = spec.source.label();
    let record_id = EnergyRecord::compute_id(&molecule, &atoms, &basis_label, &method);
    let hamiltonian_ref = match db {
        Some(db) => Some(db.put_hamiltonians(&record_id, &problem.fermion, &problem.qubit)?),
        None => None,
    };
    let record = EnergyRecord {
        record_id,
        molecule,
        bond_length_angstrom: r,
        geometry: atoms,
        charge: spec.template.charge,
        basis: basis_label,
        n_qubits: problem.n_qubits(),
        e_hf: energies.e_hf,
        e_vqe: energies.e_vqe,
        e_exact: energies.e_exact,
        hamiltonian_ref,
        method,
        evaluations: energies.evaluations,
        created_at: Utc::now(),
    };
    if let Some(db) = db {
        db.put(&record)?;
    }
    Ok(record)
}
