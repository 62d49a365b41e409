use std::process::ExitCode;

use clap::{Parser, Subcommand};
use xquant_cli::{Command, Flags, RunConfig};

/// Assess extreme-quantile predictors with cross-validated quantile scores.
#[derive(Debug, Parser)]
#[command(name = "xquant", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Score every predictor on one sample (a CSV or a draw from a model).
    Assess(Flags),
    /// Monte Carlo comparison of the selection methods.
    Simulate(Flags),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = match cli.command {
        Sub::Assess(f) => (Command::Assess, f),
        Sub::Simulate(f) => (Command::Simulate, f),
    };
    let result = RunConfig::from_flags(command, flags).and_then(|config| xquant_cli::run(&config));
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
