//! `chns`: batch driver for the decoupled CHNS schemes.
//!
//! Exit codes: 0 ok, 1 I/O failure, 2 configuration error, 3 solver
//! failure, 4 singular ξ system, 5 energy audit violation.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: chns_core::Error,
    },

    #[error(transparent)]
    Core(chns_core::Error),

    #[error("{what} violated at dt={dt:e}, step {step}: defect {defect:e} > slack {slack:e}")]
    Audit {
        what: &'static str,
        dt: f64,
        step: usize,
        defect: f64,
        slack: f64,
    },

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn from_core(e: chns_core::Error) -> Self {
        match e {
            chns_core::Error::Io(io) => CliError::Io(io),
            other => CliError::Core(other),
        }
    }

    fn at_step(step: usize, source: chns_core::Error) -> Self {
        CliError::Step { step, source }
    }

    fn exit_code(&self) -> u8 {
        let core_code = |e: &chns_core::Error| match e {
            chns_core::Error::SingularXi { .. } => 4,
            chns_core::Error::Io(_) => 1,
            _ => 3,
        };
        match self {
            CliError::Config(_) => 2,
            CliError::Step { source, .. } => core_code(source),
            CliError::Core(e) => core_code(e),
            CliError::Audit { .. } => 5,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "chns", version, about = "Decoupled energy-stable CHNS simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat key = value configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override one configuration key; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Worker threads for independent runs.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scheme to t_final, writing the audit log and snapshots.
    Simulate,
    /// Cauchy-error study over the Δt ladder.
    Converge,
    /// Energy audits at each Δt of the ladder.
    Audit,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = RunConfig::load(cli.config.as_deref(), &cli.overrides)?;
    match cli.command {
        Command::Simulate => commands::simulate(&cfg),
        Command::Converge => commands::converge(&cfg, cli.threads),
        Command::Audit => commands::audit(&cfg, cli.threads),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
