use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kcover::cli::{self, CliError};

/// Order-k Voronoi coverage control simulator.
#[derive(Debug, Parser)]
#[command(name = "kcover", version, about)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the order-k partition of the initial positions and export it
    /// as JSON.
    Partition {
        #[arg(long)]
        scenario: PathBuf,
        /// Output directory or file; JSON goes to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides every seed in the scenario.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the dynamics; writes trajectory CSV, summary JSON, final
    /// partition and SVG plots.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print H, its gradient and per-cell masses at the initial positions.
    Evaluate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Print JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Compare against the brute-force grid oracle.
    #[command(hide = true)]
    Oracle {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 256)]
        grid: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// Writes to stdout, treating a closed pipe as success.
fn emit(text: &str) -> Result<(), CliError> {
    match io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(CliError::Output {
            path: "<stdout>".into(),
            source: e,
        }),
        _ => Ok(()),
    }
}

fn run(args: Args) -> Result<(), CliError> {
    match args.command {
        Command::Partition {
            scenario,
            out,
            seed,
        } => {
            let scenario = cli::load_scenario(&scenario, seed)?;
            let doc = cli::partition(&scenario)?;
            match out {
                Some(out) => {
                    let path = cli::write_partition(&doc, &out)?;
                    log::info!("wrote {} cells to {}", doc.cells.len(), path.display());
                }
                None => emit(&format!("{}\n", doc.to_json()))?,
            }
        }
        Command::Simulate {
            scenario,
            out,
            seed,
        } => {
            let scenario = cli::load_scenario(&scenario, seed)?;
            let summary = cli::simulate(&scenario, &out)?;
            emit(&format!(
                "{} after {} steps (t = {}): H {:.9e} -> {:.9e}\n",
                if summary.converged {
                    "converged"
                } else {
                    "not converged"
                },
                summary.iterations,
                summary.final_time,
                summary.initial_h,
                summary.final_h
            ))?;
        }
        Command::Evaluate {
            scenario,
            seed,
            json,
        } => {
            let scenario = cli::load_scenario(&scenario, seed)?;
            let report = cli::evaluate(&scenario)?;
            if json {
                emit(&format!(
                    "{}\n",
                    serde_json::to_string_pretty(&report).expect("report serializes")
                ))?;
            } else {
                emit(&report.to_string())?;
            }
        }
        Command::Oracle {
            scenario,
            grid,
            seed,
        } => {
            let scenario = cli::load_scenario(&scenario, seed)?;
            emit(&cli::oracle(&scenario, grid)?.to_string())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
