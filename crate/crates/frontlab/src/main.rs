//! Command-line entry point: `frontlab <subcommand> --config <path>
//! [--out <dir>] [--seed <u64>] [--jobs <n>]`.

use clap::{Parser, Subcommand as ClapSubcommand};
use frontlab::config::load_config;
use frontlab::runner::{run, RunOptions, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "frontlab", about = "Front dynamics laboratory for nonlocal bistable media")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Path to the run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides output.directory from the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for the optional perturbation generator.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads for parallel sections (0 = auto).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
}

#[derive(ClapSubcommand)]
enum Command {
    /// Scan the structural hypotheses of the medium and report witnesses.
    Validate,
    /// Compute the bounding traveling wave and the unbalanced check.
    Wave,
    /// Evolve step initial data with snapshot and interface observers.
    Simulate,
    /// Run one named experiment.
    Experiment { name: String },
    /// Run every applicable experiment, gated on the unbalanced check.
    Suite,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    #[cfg(feature = "parallel")]
    if cli.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
        {
            eprintln!("frontlab: could not configure {} worker threads: {e}", cli.jobs);
            return ExitCode::from(2);
        }
    }

    let config = match &cli.config {
        Some(path) => match load_config(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("frontlab: invalid config {}:\n{e}", path.display());
                return ExitCode::from(2);
            }
        },
        None => {
            eprintln!("frontlab: --config <path> is required");
            return ExitCode::from(2);
        }
    };

    let out = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.output.directory));
    let sub = match &cli.command {
        Command::Validate => Subcommand::Validate,
        Command::Wave => Subcommand::Wave,
        Command::Simulate => Subcommand::Simulate,
        Command::Experiment { name } => Subcommand::Experiment(name.clone()),
        Command::Suite => Subcommand::Suite,
    };
    let opts = RunOptions {
        config,
        out,
        seed: cli.seed,
        jobs: cli.jobs,
    };

    match run(&sub, &opts) {
        Ok(outcome) => {
            println!(
                "{}: {}",
                outcome.subcommand,
                if outcome.pass { "pass" } else { "fail" }
            );
            if outcome.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("frontlab: {e}");
            ExitCode::from(2)
        }
    }
}
