//! Command-line front end: parses model files and dispatches expansion,
//! micromotion, simulation, oracle, and figure-reproduction tasks.

mod commands;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "floquet-flow",
    about = "Floquet effective Hamiltonians and micromotion from flow equations",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
pub enum EngineArg {
    Toda,
    Vmm,
    Discrete,
}

#[derive(clap::Args, Clone)]
pub struct CommonArgs {
    /// Model file (JSON)
    pub model: PathBuf,
    /// Expansion order (inverse-frequency power)
    #[arg(long)]
    pub order: Option<usize>,
    /// Expansion engine
    #[arg(long, value_enum)]
    pub engine: Option<EngineArg>,
    /// Discrete-flow step count
    #[arg(long)]
    pub steps: Option<usize>,
    /// Drive frequency (overrides the model task block)
    #[arg(long)]
    pub omega: Option<f64>,
    /// Initial drive phase (overrides the model task block)
    #[arg(long)]
    pub theta: Option<f64>,
    /// Output directory
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Seed for randomized self-checks
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Symbolic effective-Hamiltonian expansion; writes a JSON report
    Expand(CommonArgs),
    /// Micromotion exponent via the Magnus construction; writes a JSON report
    Micromotion(CommonArgs),
    /// Time propagation; writes a CSV trajectory
    Simulate(CommonArgs),
    /// Dense-matrix flow oracle and symbolic comparison; writes JSON
    Oracle(CommonArgs),
    /// Transition-probability benchmark curves; writes a CSV
    Fig1(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Expand(args) => commands::expand(&args),
        Command::Micromotion(args) => commands::micromotion(&args),
        Command::Simulate(args) => commands::simulate(&args),
        Command::Oracle(args) => commands::oracle(&args),
        Command::Fig1(args) => commands::fig1(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
