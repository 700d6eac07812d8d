use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use qcheck::aggregation::AggregationError;
use qcheck::frontends::{parse_ql, parse_qosfsa, parse_qosgc, serialize_ql, serialize_qosfsa, serialize_qosgc};
use qcheck::generate::{nested_choices, MAX_NESTING};
use qcheck::lts::Run;
use qcheck::model::System;
use qcheck::projection::project;
use qcheck::ql::{CheckError, Checker, SatOutcome, ValidityOutcome};
use qcheck::smt::{resolve_solver_command, ProcessSolver, SmtError};

const CSV_HEADER: &str = "k,u,runs,queries,cache_hits,ms,verdict";

#[derive(Parser, Debug)]
#[command(name = "qcheck", version, about = "Bounded model checking of QoS properties of communicating systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Search for an accepting run of length <= k satisfying the property
    Satisfiability(Analysis),
    /// Search for an accepting run of length <= k violating the property
    Validity(Analysis),
    /// Project a .qosgc choreography onto a .qosfsa system
    Project {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Generate benchmark inputs
    Gen {
        #[command(subcommand)]
        family: Family,
    },
}

#[derive(Subcommand, Debug)]
enum Family {
    /// Two parties taking n turns, each choosing between two messages
    NestedChoices {
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Args, Debug)]
struct Analysis {
    system: PathBuf,
    property: PathBuf,
    k: usize,
    /// Maximum number of loop unfoldings in until indices (default: k)
    #[arg(long)]
    unfoldings: Option<usize>,
    /// Print the witness run
    #[arg(long)]
    show_model: bool,
    /// Print run counts per length on stderr
    #[arg(long)]
    verbose: bool,
    /// Solver command line (default: $QCHECK_SOLVER, then `z3 -in`)
    #[arg(long)]
    solver: Option<String>,
    /// Per-query solver timeout in seconds
    #[arg(long, default_value_t = 30.0)]
    timeout: f64,
    /// Append a statistics row to this CSV file
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Satisfiability,
    Validity,
}

#[derive(Debug, Error)]
enum AppError {
    #[error("{0}")]
    Input(String),
    #[error("solver error: {0}")]
    Solver(String),
}

impl AppError {
    fn code(&self) -> u8 {
        match self {
            AppError::Input(_) => 2,
            AppError::Solver(_) => 3,
        }
    }
}

impl From<CheckError> for AppError {
    fn from(e: CheckError) -> Self {
        match e {
            CheckError::Aggregation(AggregationError::Smt(s)) => AppError::Solver(s.to_string()),
            CheckError::Aggregation(AggregationError::Unknown) => AppError::Solver(e.to_string()),
            other => AppError::Input(other.to_string()),
        }
    }
}

impl From<SmtError> for AppError {
    fn from(e: SmtError) -> Self {
        AppError::Solver(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, AppError> {
    fs::read_to_string(path).map_err(|e| AppError::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), AppError> {
    fs::write(path, text).map_err(|e| AppError::Input(format!("{}: {e}", path.display())))
}

fn describe_run(sys: &System, run: &Run, out: &mut String) {
    for s in &run.steps {
        out.push_str(&format!("  {}\n", s.action));
    }
    out.push_str(&format!("final configuration: {}\n", run.last().describe(sys)));
}

/// Write to stdout; a reader that went away (e.g. `| head`) is not an error.
fn emit(text: &str) -> Result<(), AppError> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(AppError::Input(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

fn analyse(mode: Mode, a: &Analysis) -> Result<(), AppError> {
    let path = |p: &Path| p.display().to_string();
    let sys = parse_qosfsa(&read(&a.system)?).map_err(|e| AppError::Input(e.in_file(&path(&a.system)).to_string()))?;
    let formula = parse_ql(&read(&a.property)?).map_err(|e| AppError::Input(e.in_file(&path(&a.property)).to_string()))?;
    if !(a.timeout > 0.0 && a.timeout.is_finite()) {
        return Err(AppError::Input("timeout must be a positive number of seconds".into()));
    }
    let u = a.unfoldings.unwrap_or(a.k);
    let solver = ProcessSolver::new(&resolve_solver_command(a.solver.as_deref()), Duration::from_secs_f64(a.timeout))?;
    let mut checker = Checker::new(&sys, Box::new(solver))?;

    let verbose = a.verbose;
    let mut progress = |len: usize, count: u64| {
        if verbose {
            eprintln!("length {len}: {count} runs");
        }
    };
    let started = Instant::now();
    let core = formula.desugar();
    let (verdict, witness, stats) = match mode {
        Mode::Satisfiability => {
            let v = checker.q_sat_with_progress(&core, a.k, u, &mut progress)?;
            match v.outcome {
                SatOutcome::ModelFound(r) => ("sat".to_string(), Some(r), v.stats),
                SatOutcome::NoModelWithinBound => (format!("no model found within bound k={}", a.k), None, v.stats),
            }
        }
        Mode::Validity => {
            let v = checker.q_valid_with_progress(&core, a.k, u, &mut progress)?;
            match v.outcome {
                ValidityOutcome::CounterexampleFound(r) => ("counterexample found".to_string(), Some(r), v.stats),
                ValidityOutcome::NoCounterexampleWithinBound => {
                    (format!("no counterexample found within bound k={}", a.k), None, v.stats)
                }
            }
        }
    };
    let ms = started.elapsed().as_millis();
    let mut out = format!("{verdict}\n");
    if a.show_model {
        if let Some(r) = &witness {
            describe_run(&sys, r, &mut out);
        }
    }
    emit(&out)?;

    if let Some(csv) = &a.csv {
        let fresh = fs::metadata(csv).map(|m| m.len() == 0).unwrap_or(true);
        let mut f = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(csv)
            .map_err(|e| AppError::Input(format!("{}: {e}", csv.display())))?;
        let mut row = String::new();
        if fresh {
            row.push_str(CSV_HEADER);
            row.push('\n');
        }
        row.push_str(&format!("{},{u},{},{},{},{ms},{verdict}\n", a.k, stats.runs, stats.queries, stats.cache_hits));
        f.write_all(row.as_bytes()).map_err(|e| AppError::Input(format!("{}: {e}", csv.display())))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Satisfiability(a) => analyse(Mode::Satisfiability, &a),
        Command::Validity(a) => analyse(Mode::Validity, &a),
        Command::Project { input, output } => {
            let qg = parse_qosgc(&read(&input)?).map_err(|e| AppError::Input(e.in_file(&input.display().to_string()).to_string()))?;
            let sys = project(&qg).map_err(|e| AppError::Input(e.to_string()))?;
            write(&output, &serialize_qosfsa(&sys))
        }
        Command::Gen { family: Family::NestedChoices { n, seed, output } } => {
            if !(1..=MAX_NESTING).contains(&n) {
                return Err(AppError::Input(format!("n must be between 1 and {MAX_NESTING}")));
            }
            let g = nested_choices(n, seed);
            fs::create_dir_all(&output).map_err(|e| AppError::Input(format!("{}: {e}", output.display())))?;
            write(&output.join(format!("nested_choices_{n}.qosgc")), &serialize_qosgc(&g.qosgc))?;
            write(&output.join(format!("nested_choices_{n}.ql")), &serialize_ql(&g.formula))?;
            emit(&format!("target leaf: leaf{}\n", g.target))
        }
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt().with_writer(std::io::stderr).with_max_level(tracing::Level::WARN).with_target(false).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(4) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
