//! `desitter`: kernel tables, mode solves against ODE oracles, fundamental
//! solution actions, H → 0 studies and the invariant suite.

mod commands;
mod config;
mod error;
mod table;
mod verify;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Format, Overrides, RunConfig};
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "desitter", version, about = "Klein-Gordon and Dirac solvers on de Sitter space")]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output file (stdout when absent).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Output format (csv by default, json for verify).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Seed for randomized suites.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Largest accepted relative error for kg-solve and dirac-solve.
    #[arg(long, global = true, value_name = "REAL")]
    gate: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate E, K0 and K1 over an (r, t) grid.
    Kernel,
    /// Solve a Klein-Gordon Fourier mode and compare with the ODE oracle.
    KgSolve,
    /// Solve a Dirac Fourier mode and compare with the ODE oracle.
    DiracSolve,
    /// Act with the 1D fundamental solution on a test function.
    Fundsol,
    /// Gap between the de Sitter and flat kernels as H shrinks.
    LimitH0,
    /// Run the invariant suite and emit a report.
    Verify {
        /// Inject a faulty gamma matrix (exercises the failure path).
        #[arg(long, hide = true)]
        corrupt_gamma: bool,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Kernel => "kernel",
            Command::KgSolve => "kg-solve",
            Command::DiracSolve => "dirac-solve",
            Command::Fundsol => "fundsol",
            Command::LimitH0 => "limit-h0",
            Command::Verify { .. } => "verify",
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let overrides = Overrides {
        format: cli.common.format,
        out: cli.common.out.clone(),
        seed: cli.common.seed,
        gate: cli.common.gate,
    };
    let cfg = RunConfig::load(cli.common.config.as_deref(), &overrides)?;
    let name = cli.command.name();
    let hash = cfg.hash(name);
    let outcome = match cli.command {
        Command::Kernel => commands::kernel(&cfg, hash)?,
        Command::KgSolve => commands::kg_solve(&cfg, hash)?,
        Command::DiracSolve => commands::dirac_solve(&cfg, hash)?,
        Command::Fundsol => commands::fundsol(&cfg, hash)?,
        Command::LimitH0 => commands::limit_h0(&cfg, hash)?,
        Command::Verify { corrupt_gamma } => verify::verify(&cfg, hash, corrupt_gamma)?,
    };
    let default_format = if name == "verify" { Format::Json } else { Format::Csv };
    let format = cfg.format.unwrap_or(default_format);
    match &cfg.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            outcome.table.write(format, &mut w)?;
            w.flush()?;
        }
        None => {
            let mut w = io::stdout().lock();
            outcome.table.write(format, &mut w)?;
            w.flush()?;
        }
    }
    match outcome.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("desitter: {e}");
            e.exit_code()
        }
    }
}
