//! `nogo`: command-line front end for the finite-model, singlet and
//! realizability computations in `nogo-core`.
//!
//! Exit status: 0 on success, 2 on a usage or validation error, 1 on an
//! internal failure.

mod commands;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::Failure;

#[derive(Debug, Parser)]
#[command(
    name = "nogo",
    version,
    about = "Bell no-go computations on finite models"
)]
pub struct Cli {
    /// Output format. Record-shaped results only support json.
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,

    /// Write the artifact here instead of standard output.
    #[arg(long, short, global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    /// Interpret angle flags as degrees.
    #[arg(long, global = true)]
    deg: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Singlet correlation E(0, delta) by trace algebra against -cos(delta).
    SingletScan {
        #[arg(long)]
        grid: usize,
    },
    /// Full no-go verdict for one angle triple.
    Nogo(Angles3),
    /// No-go verdicts over theta1 = 0 and a grid of (theta2, theta3).
    AngleScan {
        #[arg(long)]
        grid: usize,
    },
    /// Decide realizability of a correlation problem file.
    Realizability {
        #[arg(long, value_name = "PROBLEM_JSON")]
        file: PathBuf,
        /// Use the exact rational oracle instead of the simplex (n <= 3).
        #[arg(long)]
        exact: bool,
    },
    /// Sample one context run, or the three Bell contexts when --t3 is given.
    Simulate(SimulateArgs),
    /// Bell inequality and proof trace for a finite model file.
    BellCheck {
        #[arg(long, value_name = "MODEL_JSON")]
        file: PathBuf,
    },
    /// Spectrum of sigma_x + sigma_z against sums of eigenvalues.
    VnDemo,
}

#[derive(Debug, Args)]
pub struct Angles3 {
    #[arg(long, allow_negative_numbers = true)]
    t1: f64,
    #[arg(long, allow_negative_numbers = true)]
    t2: f64,
    #[arg(long, allow_negative_numbers = true)]
    t3: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    mode: commands::Mode,
    #[arg(long, allow_negative_numbers = true)]
    t1: f64,
    #[arg(long, allow_negative_numbers = true)]
    t2: f64,
    #[arg(long, allow_negative_numbers = true)]
    t3: Option<f64>,
    /// Samples per context.
    #[arg(long)]
    n: u64,
    #[arg(long)]
    seed: u64,
    /// Context label for a single run.
    #[arg(long, default_value = "C1")]
    id: String,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(e)) => {
            eprintln!("internal error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let artifact = commands::execute(cli)?;
    match &cli.output {
        Some(path) => std::fs::write(path, artifact)
            .map_err(|e| Failure::Internal(anyhow::anyhow!("writing {}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(artifact.as_bytes())
                .and_then(|()| out.flush())
                .map_err(|e| Failure::Internal(e.into()))
        }
    }
}
