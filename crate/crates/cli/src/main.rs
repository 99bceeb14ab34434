//! `laxlab`: batch front end for scenario files.
//!
//! Exit codes: 0 when every check passes, 1 when a check ran and failed,
//! 2 when the input is invalid or the check could not be carried out.

mod commands;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::commands::Outcome;
use crate::scenario::Scenario;

#[derive(Parser)]
#[command(
    name = "laxlab",
    version,
    about = "Structure equations, Lax pair, sine-Gordon solver and surface reconstruction"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory (overrides the scenario's `out`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Structure and zero-curvature residuals, equivalence and constraint branch.
    Verify(RunArgs),
    /// Evolve sine-Gordon initial data; write phi and energy series.
    Solve(RunArgs),
    /// Integrate frames, rebuild the surface and check its discrete curvature.
    Reconstruct(RunArgs),
    /// Lax residual convergence table over several resolutions.
    Report(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Verify,
    Solve,
    Reconstruct,
    Report,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Verify(a) => (Command::Verify, a),
        Cmd::Solve(a) => (Command::Solve, a),
        Cmd::Reconstruct(a) => (Command::Reconstruct, a),
        Cmd::Report(a) => (Command::Report, a),
    };
    let scenario = match Scenario::load(&args.scenario, command, args.out) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("laxlab: invalid scenario: {e}");
            return ExitCode::from(2);
        }
    };
    match commands::run(command, &scenario) {
        Ok(Outcome::Pass(msg)) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Ok(Outcome::Fail(msg)) => {
            eprintln!("laxlab: {msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("laxlab: error: {e:#}");
            ExitCode::from(2)
        }
    }
}
