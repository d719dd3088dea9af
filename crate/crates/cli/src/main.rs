mod verify;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use isotensor::basis::basis_export;
use isotensor::closure::{run_closure, ClosureInput};
use isotensor::isomer::{enumerate_isomers, evaluate_isomer};
use isotensor::json::format_rationals;
use isotensor::linalg::{nullspace, rank, RationalMatrix};
use isotensor::tensor::{DEFAULT_DIM, MAX_DIM};
use isotensor::{rational, DenseTensor, Error};

#[derive(Parser)]
#[command(
    name = "isotensor",
    version,
    about = "Exact isotropic tensor representations and closure checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Json,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum Degree {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Identity {
    Det4,
    #[value(name = "eq1_10")]
    Eq110,
    #[value(name = "eq1_11")]
    Eq111,
    A4,
    #[value(name = "dual_path")]
    DualPath,
    Frame,
}

#[derive(Subcommand)]
enum Command {
    /// List the distinct delta isomers of an even order.
    Isomers {
        #[arg(long)]
        order: usize,
        #[arg(long, default_value_t = DEFAULT_DIM)]
        dim: usize,
        #[arg(long, value_enum, default_value = "json")]
        emit: Emit,
    },
    /// Exact rank of the isomers flattened as tensors.
    Rank {
        #[arg(long)]
        order: usize,
        #[arg(long, default_value_t = DEFAULT_DIM)]
        dim: usize,
        /// Also print a basis of integer relations among the isomers.
        #[arg(long)]
        nullspace: bool,
    },
    /// Export the representation terms.
    Basis {
        #[arg(long, value_enum, default_value = "both")]
        degree: Degree,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check an identity exactly on seeded samples.
    Verify {
        #[arg(long, value_enum)]
        identity: Identity,
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, env = "ISOTENSOR_SEED", default_value_t = 0)]
        seed: u64,
        /// Explicit samples instead of random ones (eq1_10, eq1_11, a4).
        #[arg(long)]
        fixture: Option<PathBuf>,
    },
    /// Evaluate the contracted closure for one input record.
    Closure {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        emit: Emit,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failure kinds with their exit codes.
pub enum CliError {
    /// Exit 1.
    Failed(String),
    /// Exit 2.
    Usage(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Compressible(_) => CliError::Failed(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// What a command prints and whether it passed.
pub struct Outcome {
    pub text: String,
    pub pass: bool,
}

fn pass(text: String) -> CliResult<Outcome> {
    Ok(Outcome { text, pass: true })
}

pub fn to_pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

pub fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn check_dim(dim: usize) -> CliResult<()> {
    if !(1..=MAX_DIM).contains(&dim) {
        return Err(CliError::Usage(format!(
            "--dim must be between 1 and {MAX_DIM}, got {dim}"
        )));
    }
    Ok(())
}

fn cmd_isomers(order: usize, dim: usize, emit: Emit) -> CliResult<Outcome> {
    check_dim(dim)?;
    let set = enumerate_isomers(order)?;
    let text = match emit {
        Emit::Json => {
            let isomers: Vec<Value> = set
                .iter()
                .enumerate()
                .map(|(n, iso)| json!({"index": n, "label": iso.to_string(), "pairs": iso.pairs()}))
                .collect();
            to_pretty(&json!({"order": order, "dim": dim, "count": set.len(), "isomers": isomers}))
        }
        Emit::Table => {
            let mut out = format!("order {order}, dim {dim}: {} isomers\n", set.len());
            for (n, iso) in set.iter().enumerate() {
                out.push_str(&format!("{:>4}  {iso}\n", n + 1));
            }
            out
        }
    };
    pass(text)
}

fn cmd_rank(order: usize, dim: usize, with_nullspace: bool) -> CliResult<Outcome> {
    check_dim(dim)?;
    let set = enumerate_isomers(order)?;
    let rows = set
        .iter()
        .map(|iso| evaluate_isomer(iso, dim).map(DenseTensor::into_entries))
        .collect::<isotensor::Result<Vec<_>>>()?;
    let m = RationalMatrix::from_rows(&rows)?;
    let r = rank(&m);
    let mut report = json!({
        "order": order,
        "dim": dim,
        "count": set.len(),
        "rank": r,
        "nullity": set.len() - r,
    });
    if with_nullspace {
        let vectors: Vec<Vec<String>> = nullspace(&m).iter().map(|v| format_rationals(v)).collect();
        report["nullspace"] = json!(vectors);
    }
    pass(to_pretty(&report))
}

fn cmd_basis(degree: Degree, out: Option<&Path>) -> CliResult<Outcome> {
    let (lin, quad) = match degree {
        Degree::One => (true, false),
        Degree::Two => (false, true),
        Degree::Both => (true, true),
    };
    let export = basis_export(lin, quad);
    let text = to_pretty(&export);
    match out {
        Some(path) => {
            write_file(path, &text)?;
            let mut counts = serde_json::Map::new();
            if let Some(d) = &export.degree_1 {
                counts.insert("degree_1".into(), json!(d.len()));
            }
            if let Some(d) = &export.degree_2 {
                counts.insert("degree_2".into(), json!(d.len()));
            }
            pass(to_pretty(&counts))
        }
        None => pass(text),
    }
}

fn matrix_table(t: &DenseTensor) -> String {
    let cells: Vec<Vec<String>> = (0..t.dim())
        .map(|i| (0..t.dim()).map(|j| rational::format(t.at(i, j))).collect())
        .collect();
    let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
    cells
        .iter()
        .map(|row| {
            row.iter()
                .map(|c| format!("{c:>width$}"))
                .collect::<Vec<_>>()
                .join("  ")
                + "\n"
        })
        .collect()
}

fn cmd_closure(input: &Path, emit: Emit, out: Option<&Path>) -> CliResult<Outcome> {
    let text = read_file(input)?;
    let record: ClosureInput = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", input.display())))?;
    let output = run_closure(&record)?;
    if !output.checks.realizable_t {
        eprintln!("warning: T is not positive semidefinite");
    }
    let rendered = match emit {
        Emit::Json => to_pretty(&output),
        Emit::Table => {
            let phi = DenseTensor::try_from(&output.phi)?;
            format!(
                "{}symmetric: {}\nincompressible: {}\nrealizable_T: {}\n",
                matrix_table(&phi),
                output.checks.symmetric,
                output.checks.incompressible,
                output.checks.realizable_t
            )
        }
    };
    match out {
        Some(path) => {
            write_file(path, &rendered)?;
            pass(String::new())
        }
        None => pass(rendered),
    }
}

fn run(cli: Cli) -> CliResult<Outcome> {
    match cli.command {
        Command::Isomers { order, dim, emit } => cmd_isomers(order, dim, emit),
        Command::Rank {
            order,
            dim,
            nullspace,
        } => cmd_rank(order, dim, nullspace),
        Command::Basis { degree, out } => cmd_basis(degree, out.as_deref()),
        Command::Verify {
            identity,
            trials,
            seed,
            fixture,
        } => verify::cmd_verify(identity, trials as usize, seed, fixture.as_deref()),
        Command::Closure { input, emit, out } => cmd_closure(&input, emit, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => {
            print!("{}", outcome.text);
            if outcome.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(CliError::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
