//! Experiment command-line runner: executes study configs and emits
//! deterministic CSV (and snapshot) artifacts.

mod config;
mod runner;

use clap::{Parser, Subcommand};
use config::ExperimentConfig;
use runner::{run_config, GPE_SYSTEM_NAMES, METHOD_NAMES};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "conservo",
    about = "Structure-preserving integrator experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write its CSV artifacts.
    Run {
        /// TOML experiment description.
        config: PathBuf,
        /// Parallel workers for independent cells.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Output directory (default: $CONSERVO_OUT or the current directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Enable experiments tagged as full-scale.
        #[arg(long)]
        long: bool,
    },
    /// List the systems the runner can instantiate.
    ListSystems,
    /// List methods, tableaux, and projection directions.
    ListMethods,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            jobs,
            out,
            long,
        } => {
            let out_dir = out
                .or_else(|| std::env::var_os("CONSERVO_OUT").map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("."));
            let cfg = match ExperimentConfig::load(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            match run_config(&cfg, &out_dir, jobs, long) {
                Ok(outputs) => {
                    for p in outputs {
                        println!("wrote {}", p.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code())
                }
            }
        }
        Command::ListSystems => {
            for name in conservo::systems::SYSTEM_NAMES {
                println!("{name}");
            }
            for name in GPE_SYSTEM_NAMES {
                println!("{name}");
            }
            ExitCode::SUCCESS
        }
        Command::ListMethods => {
            println!("methods: {}", METHOD_NAMES.join(", "));
            println!("tableaux: {}", conservo::TABLEAU_NAMES.join(", "));
            println!("directions: predicted, previous, midpoint");
            println!("studies: convergence, lambda, invariant-drift, snapshot");
            ExitCode::SUCCESS
        }
    }
}
