//! Batch front end for the thermomeasure library.
//!
//! Exit codes: 0 success, 2 bad input or failed validation, 3 numerical
//! failure (battery containment, reconstruction not positive).

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Common;

#[derive(Parser, Debug)]
#[command(
    name = "thermomeasure",
    version,
    about = "Work-cost quantum state and channel tomography"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Export the charge set for dimension d
    Charges {
        #[command(flatten)]
        common: Common,
    },
    /// Run the protocol on a state and report the work ledger
    Measure {
        /// Density matrix JSON
        #[arg(long)]
        state: std::path::PathBuf,
        /// Estimate each round's work from this many sampled battery readouts
        #[arg(long)]
        samples: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Sweep the battery width and write CSV
    Sweep {
        #[arg(long)]
        state: std::path::PathBuf,
        /// Comma-separated battery widths
        #[arg(long = "s-list", value_delimiter = ',')]
        s_list: Option<Vec<f64>>,
        #[command(flatten)]
        common: Common,
    },
    /// Check a unitary against a charge set
    Isolation {
        /// Unitary matrix JSON
        #[arg(long)]
        unitary: std::path::PathBuf,
        /// Charge set JSON as written by `charges`; the built-in set for d otherwise
        #[arg(long)]
        charges: Option<std::path::PathBuf>,
        /// Optional state whose per-charge changes are reported
        #[arg(long)]
        state: Option<std::path::PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Reconstruct the Choi state of a channel
    Channel {
        /// Channel JSON with Kraus operators
        #[arg(long)]
        channel: std::path::PathBuf,
        /// Channel to compare the reconstruction against
        #[arg(long)]
        reference: Option<std::path::PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Estimate one charge's work from sampled battery readouts
    Sample {
        #[arg(long)]
        state: std::path::PathBuf,
        /// Charge label such as z:1:1
        #[arg(long)]
        label: Option<String>,
        /// Number of samples
        #[arg(long)]
        n: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Core(thermomeasure::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(msg) => f.write_str(msg),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<thermomeasure::Error> for CliError {
    fn from(e: thermomeasure::Error) -> Self {
        CliError::Core(e)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Charges { common } => commands::charges(common),
        Command::Measure {
            state,
            samples,
            common,
        } => commands::measure(&state, samples, common),
        Command::Sweep {
            state,
            s_list,
            common,
        } => commands::sweep(&state, s_list, common),
        Command::Isolation {
            unitary,
            charges,
            state,
            common,
        } => commands::isolation(&unitary, charges.as_deref(), state.as_deref(), common),
        Command::Channel {
            channel,
            reference,
            common,
        } => commands::channel(&channel, reference.as_deref(), common),
        Command::Sample {
            state,
            label,
            n,
            common,
        } => commands::sample(&state, label, n, common),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
