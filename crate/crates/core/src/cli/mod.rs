//! Batch experiment runner: `solve`, `diagnose`, `blowup` and `sweep`.
//!
//! Exit status is 0 on success, 1 on a configuration or I/O error and 2
//! when the run itself fails (no convergence, no free boundary near the
//! requested centre).

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{
    cmd_blowup, cmd_diagnose, cmd_solve, cmd_sweep, exit_code, resolve_center, run_blowup, run_diagnose, run_solve,
    Check, RunManifest, SolveSummary, EXIT_CONFIG, EXIT_FAILED, EXIT_OK,
};
pub use config::{CenterRule, DiagConfig, ProblemConfig, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "bernoulli-lab", version, about = "One-phase free boundary solver and monotonicity diagnostics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve the problem described by a config file.
    Solve { config: PathBuf },
    /// Density profile and diagnostics of a field dump.
    Diagnose { dump: PathBuf, config: PathBuf },
    /// Rescalings of a field dump around a free-boundary point.
    Blowup {
        dump: PathBuf,
        /// `nearest-fb:x,y` or `x,y`.
        #[arg(long)]
        center: String,
        /// Decreasing comma-separated radii.
        #[arg(long)]
        scales: String,
        #[arg(long, default_value_t = 64)]
        reference_cells: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve every config matching a glob, concurrently.
    Sweep {
        pattern: String,
        /// Directory for the aggregate `sweep.csv`.
        #[arg(long)]
        out: PathBuf,
    },
}

/// Runs a parsed command line and returns the process exit status.
pub fn run(cli: Cli) -> i32 {
    let res = match &cli.command {
        Command::Solve { config } => cmd_solve(config),
        Command::Diagnose { dump, config } => cmd_diagnose(dump, config),
        Command::Blowup { dump, center, scales, reference_cells, out } => {
            cmd_blowup(dump, center, scales, *reference_cells, out)
        }
        Command::Sweep { pattern, out } => cmd_sweep(pattern, out),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
