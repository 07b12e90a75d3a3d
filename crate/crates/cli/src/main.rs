//! `zeroone`: Graver bases, fiber connectivity, crossing checks and exact tests
//! for zero-one tables.

mod commands;
mod model;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CheckArgs, ConnectArgs, GraverArgs, LatinArgs, SampleArgs};

#[derive(Debug, Parser)]
#[command(name = "zeroone", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute a Graver basis, optionally square-free or pruned.
    Graver(GraverArgs),
    /// Enumerate one zero-one fiber and report its components under a move set.
    Connect(ConnectArgs),
    /// Check a crossing or distance-reduction condition.
    Check(CheckArgs),
    /// Random walk or Monte Carlo exact test.
    Sample(SampleArgs),
    /// Random Latin squares by a move walk.
    Latin(LatinArgs),
}

/// 0 pass, 1 fail, 2 usage or input error, 3 budget or cap exhausted.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<zeroone::Error>() {
        Some(zeroone::Error::BudgetExhausted { .. } | zeroone::Error::CapExceeded { .. }) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Graver(a) => commands::graver(a),
        Command::Connect(a) => commands::connect(a),
        Command::Check(a) => commands::check(a),
        Command::Sample(a) => commands::sample(a),
        Command::Latin(a) => commands::latin(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
