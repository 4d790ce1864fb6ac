//! Command-line interface: prepare a dataset cache, inspect model costs,
//! train, and evaluate. Exit codes: 0 success, 1 runtime failure, 2 usage or
//! configuration error.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use brainnet::Error;

#[derive(Parser)]
#[command(name = "brainnet", version, about = "CNN ensemble for staged dementia MRI classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decode, resize, normalize, and optionally oversample a dataset
    Prepare(commands::prepare::PrepareArgs),
    /// Print per-layer parameter, FLOP, and memory accounting
    Inspect(commands::inspect::InspectArgs),
    /// Fit a model on a prepared cache
    Train(commands::train::TrainArgs),
    /// Score checkpoints on the test split and build their ensemble
    Evaluate(commands::evaluate::EvaluateArgs),
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Prepare(args) => commands::prepare::run(args),
        Command::Inspect(args) => commands::inspect::run(args),
        Command::Train(args) => commands::train::run(args),
        Command::Evaluate(args) => commands::evaluate::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
