//! `kgraph`: validate k-graph skeletons and run their checks from the shell.
//!
//! Exit codes: 0 all checks pass, 1 validation failure, 2 check failure,
//! 3 usage error.

mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;

use config::{Cli, Command, Format, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid skeleton: {0}")]
    Invalid(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Usage(_) => 3,
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("KGRAPH_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("KGRAPH_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<(commands::Outcome, Format, bool), CliError> {
    configure_threads()?;
    let cfg = RunConfig::from_args(cli.common)?;
    let is_validate = matches!(cli.command, Command::Validate);
    let outcome = match &cli.command {
        Command::Validate => commands::validate(&cfg)?,
        Command::Fixture => commands::fixture(&cfg)?,
        cmd => {
            let sk = cfg.skeleton()?;
            match cmd {
                Command::Mce { mu, nu } => commands::mce(&sk, mu, nu)?,
                Command::Vee { paths } => commands::vee(&sk, paths)?,
                Command::Align => commands::align(&cfg, &sk)?,
                Command::Check { samples } => commands::check(&cfg, &sk, *samples)?,
                Command::Faithful { vertex, sets } => commands::faithful(&cfg, &sk, vertex, sets)?,
                Command::Validate | Command::Fixture => unreachable!(),
            }
        }
    };
    Ok((outcome, cfg.format, is_validate))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(cli) {
        Ok((outcome, format, is_validate)) => {
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&outcome.json).expect("json")),
                Format::Text => print!("{}", outcome.text),
            }
            match (outcome.passed, is_validate) {
                (true, _) => ExitCode::SUCCESS,
                (false, true) => ExitCode::from(1),
                (false, false) => ExitCode::from(2),
            }
        }
        Err(e) => {
            eprintln!("kgraph: {e}");
            ExitCode::from(e.code())
        }
    }
}
