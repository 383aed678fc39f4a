//! `dnls`: solve, sweep and validate standing waves from the command line.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::SolverArgs;

#[derive(Parser, Debug)]
#[command(name = "dnls", version, about = "Standing waves of focusing DNLS lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute one standing wave.
    Solve(SolveArgs),
    /// Solve along a grid of rho, alpha or N values.
    Sweep(SweepArgs),
    /// Solve for increasing periods and classify the large-N limit.
    Homoclinic(HomoclinicArgs),
    /// Check a potential against the structural assumptions.
    CheckPotential(CheckPotentialArgs),
    /// Brute-force maximization on tiny cells, compared with the iteration.
    Oracle(OracleArgs),
    /// Integrate the time-dependent equation from a computed wave.
    Evolve(EvolveArgs),
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Swept parameter: rho, alpha or N.
    #[arg(long)]
    pub param: String,
    /// Explicit grid, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["from", "to", "step"])]
    pub values: Option<Vec<f64>>,
    #[arg(long, requires_all = ["to", "step"])]
    pub from: Option<f64>,
    #[arg(long)]
    pub to: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
}

#[derive(Args, Debug)]
pub struct HomoclinicArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Increasing periods, comma separated.
    #[arg(long = "N-seq", value_delimiter = ',', required = true)]
    pub n_seq: Vec<usize>,
    /// Required excess of T over 2 for a localized verdict.
    #[arg(long, default_value_t = 1e-3)]
    pub margin: f64,
}

#[derive(Args, Debug)]
pub struct CheckPotentialArgs {
    #[arg(long)]
    pub potential: String,
    /// Upper end of the sampled range.
    #[arg(long, default_value_t = 10.0)]
    pub x_max: f64,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    /// Output prefix; the report is also printed to stdout.
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Grid points per angular dimension of the coarse scan.
    #[arg(long, default_value_t = 2000)]
    pub grid: usize,
}

#[derive(Args, Debug)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value_t = 10.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Time-series sampling interval in steps.
    #[arg(long, default_value_t = 100)]
    pub sample_every: u64,
    /// Evolve the staggered wave under the coupling -alpha.
    #[arg(long)]
    pub stagger: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).format_timestamp(None).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(e) = commands::configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    let outcome = match &cli.command {
        Command::Solve(a) => commands::solve(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Homoclinic(a) => commands::homoclinic(a),
        Command::CheckPotential(a) => commands::check_potential(a),
        Command::Oracle(a) => commands::oracle(a),
        Command::Evolve(a) => commands::evolve(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}
