use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use uav_noma::harness::{
    load_config, oracle_compare, oracle_csv, run_single_point, run_sweep, sweep_csv, Execution,
};
use uav_noma::Error;

#[derive(Parser)]
#[command(version, about = "UAV-relayed uplink NOMA energy-efficiency simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Aggregate the first user count and rate floor of the config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to `output_path` from the config, then stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full sweep over user counts and rate floors.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        drops: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Run drops on one thread.
        #[arg(long)]
        serial: bool,
    },
    /// Pipeline versus exhaustive oracle on tiny instances.
    OracleCompare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = load_config(config)?;
            let rows = run_single_point(&cfg, Execution::Parallel)?;
            let out = out.or_else(|| cfg.output_path.as_ref().map(PathBuf::from));
            emit(&sweep_csv(&rows), out.as_ref())
        }
        Command::Sweep {
            config,
            out,
            drops,
            seed,
            serial,
        } => {
            let mut cfg = load_config(config)?;
            if let Some(d) = drops {
                cfg.n_drops = d;
            }
            if let Some(s) = seed {
                cfg.base_seed = s;
            }
            let exec = if serial {
                Execution::Serial
            } else {
                Execution::Parallel
            };
            let rows = run_sweep(&cfg, exec)?;
            emit(&sweep_csv(&rows), Some(&out))
        }
        Command::OracleCompare { config, out } => {
            let cfg = load_config(config)?;
            let rows = oracle_compare(&cfg)?;
            emit(&oracle_csv(&rows), Some(&out))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
