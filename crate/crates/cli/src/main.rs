use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use groundstate::exact::{fci_determinant_oracle, FCI_ORBITAL_LIMIT};
use groundstate::fermion::serialize_terms;
use groundstate::integrals::{build_ao_integrals, parse_geometry, BasisSet, Geometry};
use groundstate::integrals_io::{parse_fcidump, read_ao_file, write_ao_file, write_fcidump};
use groundstate::scf::{ao_to_mo, scf_solve, ScfOptions};
use groundstate::vqe::{vqe_solve, Method, OptimizerConfig};
use groundstate::workbench::{
    bond_length_range, emit_curve, run_scan, AnsatzChoice, Database, EnergyRecord, IntegralSource, MethodSet,
    MoleculeTemplate, Problem, Query, ScanSpec, VqeSettings,
};
use groundstate::{Error, Result};

#[derive(Parser)]
#[command(name = "groundstate", version, about = "Molecular ground-state energies from Gaussian integrals to VQE")]
struct Cli {
    /// Only print warnings and errors on stderr.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute AO integrals and write them in the native AO file format.
    Integrals {
        #[arg(long)]
        geometry: PathBuf,
        #[arg(long, default_value = "sto-3g")]
        basis: String,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run RHF; optionally write the MO integrals as FCIDUMP.
    Scf {
        #[arg(long, required_unless_present = "ao_file", conflicts_with = "ao_file")]
        geometry: Option<PathBuf>,
        #[arg(long, default_value = "sto-3g")]
        basis: String,
        /// Read AO integrals from a native AO file instead of a geometry.
        #[arg(long)]
        ao_file: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print the fermionic (or qubit) Hamiltonian term listing.
    Ham {
        #[command(flatten)]
        source: SourceArgs,
        /// Print at most this many terms.
        #[arg(long)]
        limit: Option<usize>,
        /// Print the Jordan-Wigner qubit Hamiltonian instead.
        #[arg(long)]
        qubit: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run VQE.
    Vqe {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        vqe: VqeArgs,
    },
    /// Exact ground energy by dense diagonalization and determinant FCI.
    Exact {
        #[command(flatten)]
        source: SourceArgs,
    },
    /// Bond-length scan over a diatomic template.
    Scan {
        /// Atom pair, e.g. H-H or He-H.
        #[arg(long)]
        pair: String,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        charge: i32,
        #[arg(long)]
        start: f64,
        #[arg(long)]
        stop: f64,
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        #[arg(long, default_value = "sto-3g", conflicts_with = "fcidump")]
        basis: String,
        /// FCIDUMP path pattern; `{r}` is replaced by the length with two decimals.
        #[arg(long)]
        fcidump: Option<String>,
        /// Basis label recorded for FCIDUMP scans.
        #[arg(long, default_value = "fcidump")]
        label: String,
        #[arg(long, default_value = "hf,vqe,exact")]
        methods: String,
        #[arg(long, default_value_t = 0)]
        freeze: usize,
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        vqe: VqeArgs,
        #[arg(long)]
        db: Option<PathBuf>,
        /// Write the curve CSV here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Energy database operations.
    Db {
        #[command(subcommand)]
        command: DbCommand,
    },
    /// Emit a CSV curve from database records.
    Curve {
        #[arg(long)]
        db: PathBuf,
        #[command(flatten)]
        filter: FilterArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum DbCommand {
    /// Store a record from a JSON file.
    Put {
        #[arg(long)]
        db: PathBuf,
        file: PathBuf,
    },
    /// Print a record as JSON.
    Get {
        #[arg(long)]
        db: PathBuf,
        id: String,
        #[arg(long)]
        version: Option<u32>,
    },
    /// List index entries.
    List {
        #[arg(long)]
        db: PathBuf,
    },
    /// Print matching records, one summary line each.
    Query {
        #[arg(long)]
        db: PathBuf,
        #[command(flatten)]
        filter: FilterArgs,
    },
    /// Check the index against the record files.
    Audit {
        #[arg(long)]
        db: PathBuf,
    },
}

#[derive(Args)]
struct SourceArgs {
    #[arg(long, required_unless_present = "fcidump", conflicts_with = "fcidump")]
    geometry: Option<PathBuf>,
    #[arg(long, default_value = "sto-3g")]
    basis: String,
    #[arg(long)]
    fcidump: Option<PathBuf>,
    /// Number of core orbitals to freeze.
    #[arg(long, default_value_t = 0)]
    freeze: usize,
}

#[derive(Args)]
struct VqeArgs {
    #[arg(long, default_value = "uccsd")]
    ansatz: String,
    #[arg(long, default_value_t = 1)]
    depth: usize,
    #[arg(long, default_value = "nm")]
    optimizer: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum energy evaluations.
    #[arg(long, default_value_t = 4000)]
    budget: usize,
}

#[derive(Args)]
struct FilterArgs {
    #[arg(long)]
    molecule: Option<String>,
    #[arg(long)]
    basis: Option<String>,
    #[arg(long)]
    method: Option<String>,
    /// Only the newest version of each record.
    #[arg(long)]
    latest: bool,
}

impl VqeArgs {
    fn settings(&self) -> Result<VqeSettings> {
        Ok(VqeSettings {
            ansatz: AnsatzChoice::parse(&self.ansatz, self.depth)?,
            optimizer: OptimizerConfig {
                method: self.optimizer.parse::<Method>()?,
                budget: self.budget,
                seed: self.seed,
            },
        })
    }
}

impl FilterArgs {
    fn query(&self) -> Query {
        Query {
            molecule: self.molecule.clone(),
            basis: self.basis.clone(),
            method: self.method.clone(),
            latest_only: self.latest,
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

fn load_geometry(path: &Path) -> Result<Geometry> {
    parse_geometry(&read(path)?)
}

fn load_problem(source: &SourceArgs) -> Result<Problem> {
    let problem = match (&source.fcidump, &source.geometry) {
        (Some(path), _) => Problem::from_mo(parse_fcidump(&read(path)?)?),
        (None, Some(path)) => {
            Problem::from_geometry(&load_geometry(path)?, &BasisSet::load(&source.basis)?, &ScfOptions::default())?
        }
        (None, None) => return Err(Error::Usage("need --geometry or --fcidump".into())),
    };
    problem.frozen(source.freeze)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Integrals { geometry, basis, output } => {
            let g = load_geometry(&geometry)?;
            let ao = build_ao_integrals(&g, &BasisSet::load(&basis)?.for_geometry(&g)?)?;
            emit(output.as_deref(), &write_ao_file(&ao))
        }
        Command::Scf { geometry, basis, ao_file, output } => {
            let ao = match (ao_file, geometry) {
                (Some(path), _) => read_ao_file(&read(&path)?)?,
                (None, Some(path)) => {
                    let g = load_geometry(&path)?;
                    build_ao_integrals(&g, &BasisSet::load(&basis)?.for_geometry(&g)?)?
                }
                (None, None) => return Err(Error::Usage("need --geometry or --ao-file".into())),
            };
            let scf = scf_solve(&ao, &ScfOptions::default())?;
            for it in &scf.trace {
                eprintln!("{it}");
            }
            if !scf.converged {
                return Err(Error::Domain(format!("SCF not converged after {} iterations", scf.iterations)));
            }
            println!("E_HF = {}", scf.e_hf);
            if let Some(path) = output {
                emit(Some(&path), &write_fcidump(&ao_to_mo(&ao, &scf.mo_coefficients)?))?;
            }
            Ok(())
        }
        Command::Ham { source, limit, qubit, output } => {
            let p = load_problem(&source)?;
            let text = if qubit {
                let all = p.qubit.to_text();
                match limit {
                    Some(n) => all.lines().take(n).map(|l| format!("{l}\n")).collect(),
                    None => all,
                }
            } else {
                serialize_terms(&p.fermion, limit)
            };
            emit(output.as_deref(), &text)
        }
        Command::Vqe { source, vqe } => {
            let p = load_problem(&source)?;
            let settings = vqe.settings()?;
            let ansatz = settings.ansatz.build(p.n_qubits(), p.mo.n_electrons)?;
            let r = vqe_solve(&p.qubit, &ansatz, &settings.optimizer)?;
            println!("E_HF = {}", p.e_hf);
            println!("E_VQE = {}", r.energy);
            println!("ansatz = {}", ansatz.label());
            println!("optimizer = {}", settings.optimizer.method);
            println!("evaluations = {}", r.evaluations);
            println!("converged = {}", r.converged);
            let params: Vec<String> = r.parameters.iter().map(|x| x.to_string()).collect();
            println!("parameters = [{}]", params.join(", "));
            Ok(())
        }
        Command::Exact { source } => {
            let p = load_problem(&source)?;
            println!("E_exact (dense) = {}", p.exact_energy()?);
            if p.mo.n_orbitals <= FCI_ORBITAL_LIMIT {
                println!("E_exact (FCI) = {}", fci_determinant_oracle(&p.mo)?);
            }
            Ok(())
        }
        Command::Scan {
            pair,
            charge,
            start,
            stop,
            step,
            basis,
            fcidump,
            label,
            methods,
            freeze,
            workers,
            vqe,
            db,
            output,
        } => {
            let spec = ScanSpec {
                template: MoleculeTemplate::parse_pair(&pair, charge)?,
                bond_lengths: bond_length_range(start, stop, step)?,
                source: match fcidump {
                    Some(pattern) => IntegralSource::Fcidump { pattern, label },
                    None => IntegralSource::Basis(basis),
                },
                methods: methods.parse::<MethodSet>()?,
                vqe: vqe.settings()?,
                frozen_core: freeze,
                workers,
            };
            let db = db.map(Database::open).transpose()?;
            let report = run_scan(&spec, db.as_ref())?;
            for f in &report.failures {
                eprintln!("point {} failed: {}", f.bond_length, f.message);
            }
            emit(output.as_deref(), &emit_curve(&report.records)?)
        }
        Command::Db { command } => run_db(command),
        Command::Curve { db, filter, output } => {
            let records = Database::open(db)?.query(&filter.query())?;
            emit(output.as_deref(), &emit_curve(&records)?)
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "-".into())
}

fn run_db(command: DbCommand) -> Result<()> {
    match command {
        DbCommand::Put { db, file } => {
            let record = EnergyRecord::from_json(&read(&file)?)?;
            println!("{}", Database::open(db)?.put(&record)?);
            Ok(())
        }
        DbCommand::Get { db, id, version } => {
            let db = Database::open(db)?;
            let record = match version {
                Some(v) => db.get_version(&id, v)?,
                None => db.get(&id)?,
            };
            match record {
                Some(r) => {
                    println!("{}", r.to_json());
                    Ok(())
                }
                None => Err(Error::Usage(format!("no record {id}"))),
            }
        }
        DbCommand::List { db } => {
            for e in Database::open(db)?.list()? {
                println!(
                    "{}\t{}\t{}\t{}\t{}\t{}",
                    e.record_id,
                    e.version,
                    e.molecule,
                    e.basis,
                    e.bond_length_angstrom,
                    e.methods.join(",")
                );
            }
            Ok(())
        }
        DbCommand::Query { db, filter } => {
            for r in Database::open(db)?.query(&filter.query())? {
                println!(
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    r.record_id,
                    r.molecule,
                    r.basis,
                    r.bond_length_angstrom,
                    opt(r.e_hf),
                    opt(r.e_vqe),
                    opt(r.e_exact)
                );
            }
            Ok(())
        }
        DbCommand::Audit { db } => {
            let report = Database::open(db)?.audit()?;
            println!("entries = {}", report.entries);
            for (label, items) in [
                ("missing", &report.missing),
                ("corrupt", &report.corrupt),
                ("orphan", &report.orphans),
                ("version", &report.version_errors),
            ] {
                for item in items {
                    println!("{label}\t{item}");
                }
            }
            if report.is_consistent() {
                Ok(())
            } else {
                Err(Error::Record {
                    path: PathBuf::from("index.json"),
                    message: "index inconsistent with record files".into(),
                })
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let level = if cli.quiet { log::LevelFilter::Warn } else { log::LevelFilter::Info };
    env_logger::Builder::new()
        .filter_level(level)
        .format(|buf, record| match record.level() {
            log::Level::Info => writeln!(buf, "{}", record.args()),
            level => writeln!(buf, "{}: {}", level.as_str().to_lowercase(), record.args()),
        })
        .parse_env("GROUNDSTATE_LOG")
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
