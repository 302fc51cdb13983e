mod commands;
mod io;

use clap::{Parser, Subcommand};
use std::process::ExitCode;

/// Weak-signal detection in spiked complex Gaussian data.
#[derive(Debug, Parser)]
#[command(name = "spikedet", version, about)]
struct Cli {
    /// Worker threads; results do not depend on this value.
    #[arg(long, global = true, env = "SPIKEDET_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Asymptotic power envelopes over a grid of spikes (CSV or JSON).
    Envelope(commands::envelope::Args),
    /// Likelihood-ratio evidence for spikes in an eigenvalue file (JSON report).
    Detect(commands::detect::Args),
    /// Monte Carlo power of the LR and point-optimal tests (CSV or JSON).
    SimulatePower(commands::power::Args),
    /// Cross-oracle validation suites (JSON report).
    Validate(commands::validate::Args),
}

/// Failure classes mapped to exit codes.
pub enum Failure {
    /// Bad flags, unreadable or malformed input.
    Input(String),
    /// A validation suite did not meet its tolerances.
    Validation,
    /// Numerical failure while computing.
    Runtime(String),
}

impl From<spikedet_core::Error> for Failure {
    fn from(e: spikedet_core::Error) -> Self {
        use spikedet_core::Error as E;
        match e {
            E::InvalidArgument(_) | E::SuperCritical { .. } | E::DimensionMismatch(..) | E::CostGuard(_) => Failure::Input(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(3);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Envelope(a) => commands::envelope::run(a),
        Command::Detect(a) => commands::detect::run(a),
        Command::SimulatePower(a) => commands::power::run(a),
        Command::Validate(a) => commands::validate::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Validation) => ExitCode::from(2),
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
