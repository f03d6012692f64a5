//! Command-line front end for `frac-talenti`.
//!
//! [`run`] parses arguments, executes one command and returns the process
//! exit code: 0 when every verification passes, 1 when one fails, 2 for
//! configuration and precondition errors, 3 for numerical failures.

pub mod commands;
pub mod config;
pub mod output;
pub mod random;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use config::RunConfig;

/// Version of the JSON envelope written by every command.
pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable that overrides the sweep pool size.
pub const THREADS_ENV: &str = "FRAC_TALENTI_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration:\n{}", format_list(.0))]
    Config(Vec<String>),
    #[error(transparent)]
    Numeric(#[from] frac_talenti::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Output(String),
}

fn format_list(items: &[String]) -> String {
    items.iter().map(|e| format!("  - {e}")).collect::<Vec<_>>().join("\n")
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numeric(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "frac-talenti",
    version,
    about = "Fractional Green/Martin kernels and boundary Talenti checks on the unit ball"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one kernel.
    Kernel {
        #[arg(long, value_enum)]
        kind: KernelKind,
        #[command(flatten)]
        config: RunConfig,
    },
    /// Solve (-Δ)^s u = f at a point, or on a radial grid for radial f.
    Solve {
        #[command(flatten)]
        config: RunConfig,
    },
    /// Boundary trace u_f/δ^s on a sphere rule.
    Trace {
        #[command(flatten)]
        config: RunConfig,
    },
    /// Schwarz symmetrization of a source and its boundary values.
    Symmetrize {
        #[command(flatten)]
        config: RunConfig,
    },
    /// Check one claim.
    Verify {
        #[arg(value_enum)]
        claim: VerifyClaim,
        #[command(flatten)]
        config: RunConfig,
    },
    /// Run a claim over a grid of parameters concurrently.
    Sweep {
        #[arg(value_enum)]
        claim: SweepClaim,
        #[command(flatten)]
        config: RunConfig,
    },
    /// Compare the boundary trace of f ≡ 1 with the torsion value.
    Calibrate {
        #[command(flatten)]
        config: RunConfig,
    },
    /// Merge JSON reports into one Markdown summary.
    Report {
        /// JSON files written by earlier runs.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Markdown output path (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelKind {
    Green,
    Martin,
    MartinLimit,
    Poisson,
    TMoment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyClaim {
    /// Radial source, 0 < s < 1: u_{f*}/δ^s <= (u_f)*/δ^s at the sphere.
    Thm1,
    /// Radial source, 0 < s < 1: interval next to r = 1 where u_{f*} < (u_f)*.
    Crossing,
    /// Off-centre bump, 0 < s < 1, admissible radius: (u_f)*/δ^s < u_{f*}/δ^s.
    Thm2,
    /// Symmetrized Martin kernel at the sphere stays below its value at 0.
    Green,
    /// Radial source, s > 1: (u_f)*/δ^s <= u_{f*}/δ^s.
    SGt1,
    /// Off-centre bump, 1 < s <= N, strengthened radius condition.
    HigherOrder,
    /// Mass concentration of (u_f)* against u_{f*} on balls B_r.
    Mass,
    /// s = 1: both boundary values coincide.
    Classical,
    /// Lower bound approached by shrinking centred bumps.
    Sharpness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepClaim {
    Thm1,
    SGt1,
    Classical,
    Green,
    Thm2,
    Explore,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match commands::execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
