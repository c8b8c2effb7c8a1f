use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use gbsde_cli::{execute, exit_code, CommandKind, ExperimentConfig, RunOptions};

#[derive(Parser)]
#[command(name = "gbsde", version, about = "Constrained BSDE risk measures on a binary Brownian tree")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the constrained equation for the configured claim.
    Solve(Common),
    /// Risk transfer between two agents (sweep or construct).
    Transfer(Common),
    /// Run the property suite on seeded random claims.
    Verify(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Write the command's CSV table here.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Seed for sampled claims (overrides verify.seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Only print the JSON record.
    #[arg(long)]
    quiet: bool,
}

fn run(cli: Cli) -> Result<u8> {
    let (kind, args) = match cli.command {
        Command::Solve(a) => (CommandKind::Solve, a),
        Command::Transfer(a) => (CommandKind::Transfer, a),
        Command::Verify(a) => (CommandKind::Verify, a),
    };
    let cfg = ExperimentConfig::from_path(&args.config)?;
    let opts = RunOptions { csv: args.csv, seed: args.seed };
    let outcome = execute(kind, &cfg, &opts)?;
    println!("{}", outcome.record.to_json());
    if !args.quiet {
        eprintln!("{}", outcome.record.summary());
    }
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
