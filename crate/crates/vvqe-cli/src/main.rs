use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use vvqe_cli::config::{ExperimentConfig, Mode};
use vvqe_cli::runner::{run_experiment, CliOverrides};

/// Batch driver for variance-VQE experiments on molecular Hamiltonians.
#[derive(Debug, Parser)]
#[command(name = "vvqe", version, about)]
struct Cli {
    /// Experiment mode.
    #[arg(value_enum)]
    mode: Mode,
    /// Hamiltonian fixture path (overrides the config).
    #[arg(long)]
    hamiltonian: Option<PathBuf>,
    /// Experiment config (TOML). Optional for spectrum/survey with defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// RNG seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for trajectory.csv / summary.json / points.csv.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match &cli.config {
        Some(path) => match ExperimentConfig::from_path(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => ExperimentConfig::default(),
    };
    let overrides = CliOverrides {
        hamiltonian: cli.hamiltonian,
        seed: cli.seed,
        out: Some(cli.out),
    };
    match run_experiment(cli.mode, &config, &overrides) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
