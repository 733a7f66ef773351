//! Library backing the `phasecode` binary; the commands are exposed here so
//! integration tests can drive them directly.

pub mod args;
pub mod commands;
pub mod configfile;
pub mod manifest;
pub mod outguard;
pub mod sim;

use clap::Parser;
use thiserror::Error;

use args::{Cli, Command};

#[derive(Debug, Error)]
pub enum CliError {
    /// A parameter violates a precondition. Exit code 2.
    #[error("{0}")]
    Validation(String),
    /// The physics is below threshold / unresolvable. Exit code 3.
    #[error("{0}")]
    Physics(String),
    /// I/O or internal failure. Exit code 1.
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Physics(_) => 3,
            CliError::Other(_) => 1,
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Usage(#[from] clap::Error),
    #[error(transparent)]
    Command(#[from] CliError),
}

pub fn run_command(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Detect(a) => commands::run_detect(a),
        Command::Decode(a) => commands::run_decode(a),
        Command::SnrSweep(a) => commands::run_snr_sweep(a),
        Command::CapacitySweep(a) => commands::run_capacity_sweep(a),
        Command::Psd(a) => commands::run_psd(a),
        Command::ChannelSim(a) => commands::run_channel_sim(a),
        Command::Rerun(a) => {
            let manifest = manifest::Manifest::read(&a.manifest)?;
            if manifest.command == "rerun" {
                return Err(CliError::Validation("manifest cannot describe a rerun".into()));
            }
            let mut argv = vec!["phasecode".to_string(), manifest.command.clone()];
            argv.extend(manifest.args.clone());
            run_from_args(argv).map_err(|e| match e {
                RunError::Usage(u) => CliError::Validation(u.to_string()),
                RunError::Command(c) => c,
            })
        }
    }
}

/// Parse an argument vector (including the program name), splice in any
/// `--config` file, and execute the command.
pub fn run_from_args(argv: Vec<String>) -> Result<(), RunError> {
    let argv = apply_config_file(argv)?;
    let cli = Cli::try_parse_from(&argv)?;
    run_command(&cli.command)?;
    Ok(())
}

/// Expand `--config <file>` into its flag list, ahead of the explicit
/// flags so the command line wins.
fn apply_config_file(argv: Vec<String>) -> Result<Vec<String>, CliError> {
    if argv.len() < 2 {
        return Ok(argv);
    }
    let (head, tail) = argv.split_at(2);
    let (rest, config) = configfile::split_config_flag(tail);
    match config {
        None => Ok(argv),
        Some(path) => {
            let mut out = head.to_vec();
            out.extend(configfile::load(std::path::Path::new(&path))?);
            out.extend(rest);
            Ok(out)
        }
    }
}
