use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};

use fragility_core::diagnostics::{
    coherence_2norm, mixedness, purity, renyi_entropy, variance, HermitianObservable, RenyiOrder, DEGENERACY_REL_GAP,
};
use fragility_core::dynamics::{format_value, DEFAULT_FD_STEP};
use fragility_core::figures::write_figures;
use fragility_core::fragility::{fragility_1, fragility_2, fragility_n, DEFAULT_EIGEN_FLOOR, IMAGINARY_RESIDUE_TOL};
use fragility_core::matrix::HERMITIAN_TOL;
use fragility_core::scenarios::{run_scenario, ScenarioConfig, FOCK_CONVERGENCE_TOL, MAX_FOCK_DIM, SCENARIO_NAMES};
use fragility_core::states::STATE_TOL;
use fragility_core::verify::{self, Suite, Tolerances, VerifyOptions};
use fragility_core::{ComplexMatrix, DensityMatrix, Error};

const EXIT_USAGE: u8 = 1;
const EXIT_VERIFICATION: u8 = 2;
const EXIT_IO: u8 = 3;

/// Entropy production at the onset of interactions: scenarios, figure
/// tables, invariant checks and diagnostics of user-supplied states.
#[derive(Parser, Debug)]
#[command(name = "fragility", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a named scenario and write its trajectory as CSV.
    Scenario {
        /// case1, case2, fock-env, udw, thermal-sweep or fragility-comparison.
        name: String,
        /// JSON file: {"scenario", "params", "grid": {"t_max", "points"}, "fock_dim"}.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Diagnostics of one state against one observable, as a CSV header and row.
    Diag {
        /// Density matrix as JSON {"dim", "re", "im"} (row-major).
        #[arg(long)]
        state: PathBuf,
        /// Hermitian observable in the same format.
        #[arg(long)]
        obs: PathBuf,
        /// Also report the n-fragility of this order.
        #[arg(long)]
        n: Option<u32>,
        /// Also report entropies and higher fragilities.
        #[arg(long)]
        all: bool,
    },
    /// Run the randomised invariant suites; exits with 2 if any check fails.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random configurations per check (suite default when omitted).
        #[arg(long)]
        trials: Option<usize>,
        /// JSON object overriding any subset of the tolerances below.
        #[arg(long)]
        tolerances: Option<PathBuf>,
    },
    /// Write the CSV tables behind every figure.
    Figures {
        #[arg(long, env = "FRAGILITY_OUTDIR", default_value = "figures")]
        outdir: PathBuf,
    },
}

fn tolerance_help() -> String {
    format!(
        "Default tolerances:\n\
         \x20 Hermiticity check = {HERMITIAN_TOL:e} (relative to max |entry|)\n\
         \x20 density-matrix trace and positivity = {STATE_TOL:e}\n\
         \x20 eigenvalue degeneracy gap = {DEGENERACY_REL_GAP:e} (relative to spectral radius)\n\
         \x20 1-fragility eigenvalue floor = {DEFAULT_EIGEN_FLOOR:e}\n\
         \x20 imaginary residue in real traces = {IMAGINARY_RESIDUE_TOL:e}\n\
         \x20 finite-difference step = {DEFAULT_FD_STEP:e}\n\
         \x20 Fock truncation convergence = {FOCK_CONVERGENCE_TOL:e} (largest truncation {MAX_FOCK_DIM})\n\
         verify thresholds (override with --tolerances FILE):\n{}\n\
         Exit codes: 0 success, 1 usage error, 2 verification failure, 3 I/O or parse error.\n\
         FRAGILITY_OUTDIR sets the default directory for `figures`.",
        Tolerances::default().describe()
    )
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn io(context: &Path, err: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_IO,
            message: format!("{}: {err}", context.display()),
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::Io(_) | Error::Json(_) => EXIT_IO,
            Error::Truncation { .. } | Error::ImaginaryResidue(_) | Error::NonFiniteSample(_) | Error::Domain(_) => {
                EXIT_VERIFICATION
            }
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: err.to_string(),
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

/// Matrix files that fail to parse or describe an invalid state are input
/// errors.
fn read_matrix(path: &Path) -> Result<ComplexMatrix, Failure> {
    ComplexMatrix::from_json_str(&read_text(path)?).map_err(|e| Failure::io(path, e))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::io(path, e)),
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::io(Path::new("<stdout>"), e)),
    }
}

fn scenario(name: &str, config: Option<&Path>, out: Option<&Path>) -> Result<(), Failure> {
    if !SCENARIO_NAMES.contains(&name) {
        return Err(Failure::usage(format!(
            "unknown scenario `{name}`; expected one of {}",
            SCENARIO_NAMES.join(", ")
        )));
    }
    let cfg = match config {
        Some(path) => ScenarioConfig::from_json_str(&read_text(path)?).map_err(|e| Failure::io(path, e))?,
        None => ScenarioConfig::default(),
    };
    let output = run_scenario(name, &cfg)?;
    for note in &output.notes {
        eprintln!("{name}: {note}");
    }
    emit(out, &output.trajectory.to_csv())
}

fn diag(state: &Path, obs: &Path, n: Option<u32>, all: bool) -> Result<(), Failure> {
    let rho = DensityMatrix::new(read_matrix(state)?).map_err(|e| Failure::io(state, e))?;
    let b = HermitianObservable::new(read_matrix(obs)?).map_err(|e| Failure::io(obs, e))?;
    if rho.dim() != b.dim() {
        return Err(Failure::io(
            obs,
            format!("observable has dimension {}, state has {}", b.dim(), rho.dim()),
        ));
    }
    let mut cols: Vec<(String, f64)> = vec![
        ("purity".into(), purity(&rho)),
        ("mixedness".into(), mixedness(&rho)),
        ("coherence".into(), coherence_2norm(&rho, &b)?),
        ("variance".into(), variance(&rho, &b)?),
    ];
    let f1 = match fragility_1(&rho, &b, DEFAULT_EIGEN_FLOOR) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("f1: {e}");
            f64::NAN
        }
    };
    cols.push(("f1".into(), f1));
    cols.push(("f2".into(), fragility_2(&rho, &b)?));
    let mut orders: Vec<u32> = Vec::new();
    if all {
        orders.extend([3, 4]);
    }
    if let Some(n) = n {
        if n == 0 {
            return Err(Failure::usage("--n must be at least 1"));
        }
        if n > 2 && !orders.contains(&n) {
            orders.push(n);
        }
    }
    for k in orders {
        cols.push((format!("f{k}"), fragility_n(&rho, &b, k)?));
    }
    if all {
        cols.push(("vn".into(), renyi_entropy(&rho, RenyiOrder::VonNeumann)?));
        cols.push(("renyi2".into(), renyi_entropy(&rho, RenyiOrder::Integer(2))?));
        cols.push(("variance_minus_f2".into(), cols[3].1 - cols[5].1));
    }
    let header: Vec<&str> = cols.iter().map(|(n, _)| n.as_str()).collect();
    let row: Vec<String> = cols.iter().map(|(_, v)| format_value(*v)).collect();
    emit(None, &format!("{}\n{}\n", header.join(","), row.join(",")))
}

fn run_verify(suite: &str, seed: u64, trials: Option<usize>, tolerances: Option<&Path>) -> Result<(), Failure> {
    let suite: Suite = suite.parse().map_err(|e: Error| Failure::usage(e.to_string()))?;
    let tolerances = match tolerances {
        Some(path) => Tolerances::from_json_str(&read_text(path)?).map_err(|e| Failure::io(path, e))?,
        None => Tolerances::default(),
    };
    if trials == Some(0) {
        return Err(Failure::usage("--trials must be positive"));
    }
    let results = verify::run(
        suite,
        &VerifyOptions {
            seed,
            trials,
            tolerances,
        },
    )?;
    let mut text = String::new();
    for r in &results {
        text.push_str(&r.to_string());
        text.push('\n');
    }
    let failed = results.iter().filter(|r| !r.passed()).count();
    text.push_str(&format!("{} checks, {failed} failed\n", results.len()));
    emit(None, &text)?;
    if failed > 0 {
        return Err(Failure {
            code: EXIT_VERIFICATION,
            message: format!("{failed} verification check(s) above tolerance"),
        });
    }
    Ok(())
}

fn figures(outdir: &Path) -> Result<(), Failure> {
    let written = write_figures(outdir).map_err(|e| match e {
        Error::Io(io) => Failure::io(outdir, io),
        other => other.into(),
    })?;
    for (fig, path) in written {
        println!("{}", path.display());
        for note in &fig.output.notes {
            eprintln!("{}: {note}", fig.name);
        }
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Scenario { name, config, out } => scenario(&name, config.as_deref(), out.as_deref()),
        Command::Diag { state, obs, n, all } => diag(&state, &obs, n, all),
        Command::Verify {
            suite,
            seed,
            trials,
            tolerances,
        } => run_verify(&suite, seed, trials, tolerances.as_deref()),
        Command::Figures { outdir } => figures(&outdir),
    }
}

fn main() -> ExitCode {
    let help = tolerance_help();
    let command = Cli::command()
        .after_help(help.clone())
        .mut_subcommand("verify", |c| c.after_help(help.clone()))
        .mut_subcommand("diag", |c| c.after_help(help.clone()));
    let cli = match command.try_get_matches().and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
