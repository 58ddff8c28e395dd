use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod output;

use commands::RunOptions;
use config::{CommandError, ExperimentConfig};

/// Experiment runner for adiabatic QFT synthesis with circulant Hamiltonians.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Instantaneous eigenvalues on the schedule grid.
    Eigentraj(Common),
    /// Propagator, populations and phased-DFT factorization.
    Evolve(Common),
    /// Gaps and nonadiabatic couplings along the schedule.
    Adiabaticity(Common),
    /// Phase estimation through the inverse schedule.
    Qpe(Common),
    /// Model builders: level shifts, circulant spectra, gauge reduction.
    Models(Common),
    /// Factorization residual and QPE fidelity over E·T values.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also write SVG plots.
    #[arg(long)]
    svg: bool,
    /// Override the number of time steps.
    #[arg(long)]
    steps: Option<usize>,
    /// Seed for sampled measurements (`qpe.shots`).
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common) = match &cli.command {
        Command::Eigentraj(c) => ("eigentraj", c),
        Command::Evolve(c) => ("evolve", c),
        Command::Adiabaticity(c) => ("adiabaticity", c),
        Command::Qpe(c) => ("qpe", c),
        Command::Models(c) => ("models", c),
        Command::Sweep(c) => ("sweep", c),
    };
    match run(name, common) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(name: &str, common: &Common) -> Result<(), CommandError> {
    if common.steps == Some(0) {
        return Err(config::ConfigError("--steps must be positive".into()).into());
    }
    let cfg = ExperimentConfig::load(&common.config)?;
    let opts = RunOptions {
        out: common.out.clone(),
        svg: common.svg,
        steps: common.steps,
        seed: common.seed,
    };
    match name {
        "eigentraj" => commands::eigentraj(&cfg, &opts),
        "evolve" => commands::evolve(&cfg, &opts),
        "adiabaticity" => commands::adiabaticity(&cfg, &opts),
        "qpe" => commands::qpe(&cfg, &opts),
        "models" => commands::models(&cfg, &opts),
        "sweep" => commands::sweep(&cfg, &opts),
        _ => unreachable!(),
    }
}
