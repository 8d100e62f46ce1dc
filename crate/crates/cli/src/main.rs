//! `mnls`: command-line front end for the magnetic NLS groundstate laboratory.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "mnls",
    version,
    about = "Groundstates of the magnetic nonlinear Schrödinger equation"
)]
struct Cli {
    /// JSON file with one object of settings per subcommand name.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (capped by MNLS_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Radial zero-field groundstate by shooting.
    Radial(RadialArgs),
    /// One groundstate on a grid.
    Solve(SolveArgs),
    /// Ground energy along a ray of field strengths.
    Sweep(SweepArgs),
    /// Leading eigenvalues of the linearized operator.
    Spectrum(SpectrumArgs),
    /// Tail fits: the 2d decay law or the 3d Gaussian bound.
    Decay(DecayArgs),
    /// Invariant suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    /// Box half extent.
    #[arg(long = "box")]
    half_extent: Option<f64>,
    /// Points per axis (odd).
    #[arg(long)]
    n: Option<usize>,
}

impl GridArgs {
    fn patch(&self) -> Value {
        json!({"dim": self.dim, "p": self.p, "box": self.half_extent, "n": self.n})
    }
}

#[derive(Debug, Args)]
struct SolverArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    residual_tol: Option<f64>,
    /// gaussian or radial-oracle.
    #[arg(long, value_parser = ["gaussian", "radial-oracle"])]
    init: Option<String>,
    /// Start from a dump on the same grid.
    #[arg(long, conflicts_with = "init")]
    init_file: Option<PathBuf>,
}

impl SolverArgs {
    fn patch(&self) -> Value {
        let init = match (&self.init, &self.init_file) {
            (_, Some(path)) => json!({"kind": "file", "path": path}),
            (Some(kind), None) => json!({"kind": kind}),
            (None, None) => Value::Null,
        };
        json!({"solver": {
            "seed": self.seed,
            "max_iters": self.max_iters,
            "residual_tol": self.residual_tol,
            "init": init,
        }})
    }
}

#[derive(Debug, Args)]
struct RadialArgs {
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    rmax: Option<f64>,
    #[arg(long)]
    mesh: Option<usize>,
    /// CSV of r, u, u'.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    b: Option<f64>,
    /// Solve the real decoupled problem instead.
    #[arg(long)]
    decoupled: bool,
    /// Binary field dump.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Comma-separated field strengths, including 0.
    #[arg(long, value_delimiter = ',')]
    b: Option<Vec<f64>>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// One field strength, or several (including 0) for a convergence sweep.
    #[arg(long, value_delimiter = ',')]
    b: Option<Vec<f64>>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug, Args)]
struct DecayArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    b: Option<f64>,
    /// r_lo,r_hi of the 2d fit window.
    #[arg(long, value_delimiter = ',')]
    window: Option<Vec<f64>>,
    /// Analyse a field dump instead of solving.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// 65²/49³ grids instead of 129²/65³.
    #[arg(long)]
    quick: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    report: Option<PathBuf>,
}

fn with(mut base: Value, extra: Value) -> Value {
    config::overlay(&mut base, extra);
    base
}

fn flag(set: bool) -> Value {
    if set {
        Value::Bool(true)
    } else {
        Value::Null
    }
}

fn init_threads(requested: Option<usize>) -> CliResult<()> {
    let cap = match std::env::var("MNLS_THREADS") {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .ok()
                .filter(|n| *n > 0)
                .ok_or_else(|| {
                    CliError::Usage(format!("MNLS_THREADS={v} is not a positive integer"))
                })?,
        ),
        Err(_) => None,
    };
    if requested == Some(0) {
        return Err(CliError::Usage("--threads must be positive".into()));
    }
    let available = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let mut threads = requested.unwrap_or(available);
    if let Some(cap) = cap {
        threads = threads.min(cap);
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> CliResult<()> {
    init_threads(cli.threads)?;
    let file = cli.config.as_deref();
    match cli.command {
        Command::Radial(a) => commands::radial(config::resolve(
            "radial",
            file,
            json!({"dim": a.dim, "p": a.p, "rmax": a.rmax, "mesh": a.mesh, "out": a.out, "report": a.report}),
        )?),
        Command::Solve(a) => {
            let flags = with(a.grid.patch(), a.solver.patch());
            let flags = with(
                flags,
                json!({"b": a.b, "decoupled": flag(a.decoupled), "out": a.out, "report": a.report}),
            );
            commands::solve(config::resolve("solve", file, flags)?)
        }
        Command::Sweep(a) => {
            let flags = with(a.grid.patch(), a.solver.patch());
            let flags = with(flags, json!({"b": a.b, "out": a.out, "report": a.report}));
            commands::sweep(config::resolve("sweep", file, flags)?)
        }
        Command::Spectrum(a) => {
            let flags = with(a.grid.patch(), a.solver.patch());
            let flags = with(
                flags,
                json!({"b": a.b, "k": a.k, "tol": a.tol, "out": a.out, "report": a.report}),
            );
            commands::spectrum(config::resolve("spectrum", file, flags)?)
        }
        Command::Decay(a) => {
            let flags = with(a.grid.patch(), a.solver.patch());
            let flags = with(
                flags,
                json!({"b": a.b, "window": a.window, "input": a.input, "out": a.out, "report": a.report}),
            );
            commands::decay(config::resolve("decay", file, flags)?)
        }
        Command::Verify(a) => commands::verify(config::resolve(
            "verify",
            file,
            json!({"quick": flag(a.quick), "seed": a.seed, "report": a.report}),
        )?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mnls: {e}");
            e.exit_code()
        }
    }
}
