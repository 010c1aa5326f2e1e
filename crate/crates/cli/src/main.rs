//! `fortin`: generate problem instances, compute inf-sup constants, build and
//! certify Fortin operators, and run the Banach-space checks.
//!
//! Exit codes: 0 when every verdict passes, 1 when a mathematical property
//! fails, 2 when the input is invalid.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fortin_core::fortin::Tolerances;
use fortin_core::linalg::DEFAULT_RANK_TOL;

mod banach;
mod fortin_cmd;
mod gen;
mod input;
mod report;

#[derive(Parser)]
#[command(name = "fortin", version, about = "Inf-sup constants and certified Fortin operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a problem file from a generator.
    Gen(gen::GenArgs),
    /// Compute ‖a‖, the fine and discrete inf-sup constants and α̃.
    Analyze(fortin_cmd::AnalyzeArgs),
    /// Build the Fortin operator and optionally certify it.
    Fortin(fortin_cmd::FortinArgs),
    /// Banach-space checks on a small matrix.
    Banach(banach::BanachArgs),
}

/// Flags shared by the report-producing subcommands.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Relative tolerance for certificate residuals and bound slacks.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Relative singular-value cutoff for rank decisions.
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    pub rank_tol: f64,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Suppress the summary table.
    #[arg(long)]
    pub quiet: bool,
}

impl Common {
    pub fn tolerances(&self) -> Result<Tolerances, CliError> {
        for (name, v) in [("--tol", self.tol), ("--rank-tol", self.rank_tol)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::input(format!("{name} must be a positive number, got {v}")));
            }
        }
        Ok(Tolerances {
            residual: self.tol,
            rank: self.rank_tol,
        })
    }
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

/// Errors that say something about the mathematics rather than the input.
pub fn is_property_failure(e: &fortin_core::Error) -> bool {
    use fortin_core::Error::*;
    matches!(
        e,
        InfSupFailure { .. } | NotSurjective { .. } | NotBijective { .. } | SolverStall { .. } | InconsistentCriteria { .. }
    )
}

impl From<fortin_core::Error> for CliError {
    fn from(e: fortin_core::Error) -> Self {
        Self {
            code: if is_property_failure(&e) { 1 } else { 2 },
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Gen(a) => gen::run(a),
        Command::Analyze(a) => fortin_cmd::analyze(a),
        Command::Fortin(a) => fortin_cmd::fortin(a),
        Command::Banach(a) => banach::run(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
