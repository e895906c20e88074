use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, OpenOptions};
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::scan::EnergyRecord;
use crate::fermion::{write_fop, FermionOperator};
use crate::pauli::PauliSum;
use crate::{Error, Result};

const INDEX_FILE: &str = "index.json";
const LOCK_FILE: &str = "index.lock";
const RECORDS_DIR: &str = "records";
const HAMILTONIANS_DIR: &str = "hamiltonians";
const LOCK_TIMEOUT: Duration = Duration::from_secs(30);

/// Paths (relative to the store root) of a record's serialized Hamiltonians.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HamiltonianRef {
    pub fermion: String,
    pub qubit: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub record_id: String,
    pub version: u32,
    pub file: String,
    pub molecule: String,
    pub basis: String,
    pub bond_length_angstrom: f64,
    pub methods: Vec<String>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct Index {
    entries: Vec<IndexEntry>,
}

/// Record filter; unset fields match everything.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Query {
    pub molecule: Option<String>,
    pub basis: Option<String>,
    /// Matches records whose method list contains this name.
    pub method: Option<String>,
    /// Only the newest version of each record id.
    pub latest_only: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AuditReport {
    pub entries: usize,
    /// Index entries whose file is absent.
    pub missing: Vec<String>,
    /// Indexed files that fail to parse or disagree with their entry.
    pub corrupt: Vec<String>,
    /// Record files with no index entry.
    pub orphans: Vec<String>,
    /// `(id, version)` pairs listed more than once, or version gaps.
    pub version_errors: Vec<String>,
}

impl AuditReport {
    pub fn is_consistent(&self) -> bool {
        self.missing.is_empty() && self.corrupt.is_empty() && self.version_errors.is_empty()
    }
}

/// Directory-backed record store.
///
/// Layout: `index.json`, `records/<id>.<version>.json`, and
/// `hamiltonians/<id>.{fop,pauli}`. Writers serialize on an in-process mutex
/// and an exclusive lock file; every file is written to a temporary name and
/// renamed into place, so readers never see partial content.
#[derive(Debug)]
pub struct Database {
    root: PathBuf,
    writer: Mutex<()>,
}

struct LockGuard(PathBuf);

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().expect("file inside store");
    let name = path.file_name().expect("file name").to_string_lossy();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

impl Database {
    /// Opens the store at `root`, creating it if needed.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        for dir in [root.clone(), root.join(RECORDS_DIR), root.join(HAMILTONIANS_DIR)] {
            fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        }
        Ok(Self {
            root,
            writer: Mutex::new(()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn lock(&self) -> Result<LockGuard> {
        let path = self.root.join(LOCK_FILE);
        let start = Instant::now();
        loop {
            match OpenOptions::new().write(true).create_new(true).open(&path) {
                Ok(_) => return Ok(LockGuard(path)),
                Err(e) if e.kind() == ErrorKind::AlreadyExists && start.elapsed() < LOCK_TIMEOUT => {
                    std::thread::sleep(Duration::from_millis(2));
                }
                Err(e) => return Err(Error::io(&path, e)),
            }
        }
    }

    fn read_index(&self) -> Result<Index> {
        let path = self.root.join(INDEX_FILE);
        match fs::read_to_string(&path) {
            Ok(text) => serde_json::from_str(&text).map_err(|e| Error::Record {
                path,
                message: e.to_string(),
            }),
            Err(e) if e.kind() == ErrorKind::NotFound => Ok(Index::default()),
            Err(e) => Err(Error::io(path, e)),
        }
    }

    /// Stores `record` as a new version of its id and returns the id.
    pub fn put(&self, record: &EnergyRecord) -> Result<String> {
        if record.record_id != record.expected_id() {
            return Err(Error::Usage(format!(
                "record id {} does not match its content hash {}",
                record.record_id,
                record.expected_id()
            )));
        }
        let _local = self.writer.lock().unwrap_or_else(|p| p.into_inner());
        let _file = self.lock()?;
        let mut index = self.read_index()?;
        let version = index
            .entries
            .iter()
            .filter(|e| e.record_id == record.record_id)
            .map(|e| e.version)
            .max()
            .unwrap_or(0)
            + 1;
        let file = format!("{RECORDS_DIR}/{}.{version}.json", record.record_id);
        let body = serde_json::to_vec_pretty(record).expect("serializable record");
        write_atomic(&self.root.join(&file), &body)?;
        index.entries.push(IndexEntry {
            record_id: record.record_id.clone(),
            version,
            file,
            molecule: record.molecule.clone(),
            basis: record.basis.clone(),
            bond_length_angstrom: record.bond_length_angstrom,
            methods: record.method.methods.clone(),
        });
        let body = serde_json::to_vec_pretty(&index).expect("serializable index");
        write_atomic(&self.root.join(INDEX_FILE), &body)?;
        Ok(record.record_id.clone())
    }

    /// Writes `<id>.fop` and `<id>.pauli` under `hamiltonians/`.
    pub fn put_hamiltonians(&self, id: &str, fermion: &FermionOperator, qubit: &PauliSum) -> Result<HamiltonianRef> {
        let r = HamiltonianRef {
            fermion: format!("{HAMILTONIANS_DIR}/{id}.fop"),
            qubit: format!("{HAMILTONIANS_DIR}/{id}.pauli"),
        };
        write_atomic(&self.root.join(&r.fermion), write_fop(fermion).as_bytes())?;
        write_atomic(&self.root.join(&r.qubit), qubit.to_text().as_bytes())?;
        Ok(r)
    }

    fn load(&self, entry: &IndexEntry) -> Result<EnergyRecord> {
        let path = self.root.join(&entry.file);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Record {
            path,
            message: e.to_string(),
        })
    }

    /// Newest version of `id`.
    pub fn get(&self, id: &str) -> Result<Option<EnergyRecord>> {
        let index = self.read_index()?;
        match index.entries.iter().filter(|e| e.record_id == id).max_by_key(|e| e.version) {
            Some(e) => self.load(e).map(Some),
            None => Ok(None),
        }
    }

    pub fn get_version(&self, id: &str, version: u32) -> Result<Option<EnergyRecord>> {
        let index = self.read_index()?;
        match index.entries.iter().find(|e| e.record_id == id && e.version == version) {
            Some(e) => self.load(e).map(Some),
            None => Ok(None),
        }
    }

    /// Index entries in insertion order.
    pub fn list(&self) -> Result<Vec<IndexEntry>> {
        Ok(self.read_index()?.entries)
    }

    /// Matching records sorted by (molecule, bond length, created_at).
    pub fn query(&self, q: &Query) -> Result<Vec<EnergyRecord>> {
        let index = self.read_index()?;
        let mut latest: BTreeMap<&str, u32> = BTreeMap::new();
        for e in &index.entries {
            let v = latest.entry(&e.record_id).or_default();
            *v = (*v).max(e.version);
        }
        let mut out = Vec::new();
        for e in &index.entries {
            if q.latest_only && latest[e.record_id.as_str()] != e.version {
                continue;
            }
            if q.molecule.as_ref().is_some_and(|m| *m != e.molecule)
                || q.basis.as_ref().is_some_and(|b| !b.eq_ignore_ascii_case(&e.basis))
                || q.method.as_ref().is_some_and(|m| !e.methods.contains(m))
            {
                continue;
            }
            out.push(self.load(e)?);
        }
        out.sort_by(|a, b| {
            a.molecule
                .cmp(&b.molecule)
                .then(a.bond_length_angstrom.total_cmp(&b.bond_length_angstrom))
                .then(a.created_at.cmp(&b.created_at))
        });
        Ok(out)
    }

    /// Cross-checks the index against the record files.
    pub fn audit(&self) -> Result<AuditReport> {
        let index = self.read_index()?;
        let mut report = AuditReport {
            entries: index.entries.len(),
            ..Default::default()
        };
        let mut seen = BTreeSet::new();
        let mut versions: BTreeMap<&str, Vec<u32>> = BTreeMap::new();
        for e in &index.entries {
            if !seen.insert((e.record_id.as_str(), e.version)) {
                report.version_errors.push(format!("{} v{} listed twice", e.record_id, e.version));
            }
            versions.entry(&e.record_id).or_default().push(e.version);
            let path = self.root.join(&e.file);
            if !path.exists() {
                report.missing.push(e.file.clone());
                continue;
            }
            match self.load(e) {
                Ok(r) if r.record_id == e.record_id && r.expected_id() == r.record_id && r.molecule == e.molecule => {}
                _ => report.corrupt.push(e.file.clone()),
            }
        }
        for (id, mut vs) in versions {
            vs.sort_unstable();
            if vs.iter().enumerate().any(|(k, v)| *v != k as u32 + 1) {
                report.version_errors.push(format!("{id} has versions {vs:?}"));
            }
        }
        let indexed: BTreeSet<&str> = index.entries.iter().map(|e| e.file.as_str()).collect();
        let dir = self.root.join(RECORDS_DIR);
        for f in fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
            let f = f.map_err(|e| Error::io(&dir, e))?;
            let name = f.file_name().to_string_lossy().into_owned();
            if name.starts_with('.') {
                continue;
            }
            let rel = format!("{RECORDS_DIR}/{name}");
            if !indexed.contains(rel.as_str()) {
                report.orphans.push(rel);
            }
        }
        Ok(report)
    }
}
