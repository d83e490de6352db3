//! Command-line front end for `cdm-core`: synthetic histories, next-draw
//! prediction, walk-forward backtests and staking simulation.
//!
//! [`run`] parses arguments and executes a subcommand without touching the
//! process, so it can be driven from tests; the `cdm` binary forwards its
//! result to stdout, stderr and the exit code.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;

use std::ffi::OsString;

use clap::Parser;

pub use args::Cli;
pub use error::{CliError, CliResult};

/// Everything a run produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let code = e.exit_code();
            return if code == 0 {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    match execute(&cli) {
        Ok(stdout) => Outcome {
            code: 0,
            stdout,
            stderr: String::new(),
        },
        Err(e) => Outcome {
            code: e.exit_code(),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

/// Runs the parsed command, writing to `--output` when given and otherwise
/// returning the text meant for stdout.
pub fn execute(cli: &Cli) -> CliResult<String> {
    use args::Command;
    let rendered = match &cli.command {
        Command::Synth(a) => commands::cmd_synth(a)?,
        Command::Predict(a) => commands::cmd_predict(a)?,
        Command::Backtest(a) => commands::cmd_backtest(a)?,
        Command::Simulate(a) => commands::cmd_simulate(a)?,
    };
    match rendered.output {
        Some(path) => {
            std::fs::write(&path, &rendered.body)
                .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
            Ok(String::new())
        }
        None => Ok(rendered.body),
    }
}
