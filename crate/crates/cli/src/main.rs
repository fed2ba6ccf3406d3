mod config;
mod output;
mod run;

use std::fmt::Display;
use std::process::ExitCode;

use clap::Parser;
use keylog_core::SimError;
use serde_json::json;

use config::{Cli, RunConfig};

/// A failure reported as one JSON line on stderr.
#[derive(Debug)]
pub struct CliError {
    code: &'static str,
    message: String,
    context: String,
    exit: u8,
}

impl CliError {
    pub fn config(message: impl Into<String>, context: impl Display) -> Self {
        CliError { code: "config", message: message.into(), context: context.to_string(), exit: 1 }
    }

    pub fn io(message: impl Into<String>, context: impl Display) -> Self {
        CliError { code: "io", message: message.into(), context: context.to_string(), exit: 1 }
    }

    pub fn sim(err: SimError, context: impl Display) -> Self {
        if err.is_numerical() {
            CliError { code: "numerical", message: err.to_string(), context: context.to_string(), exit: 2 }
        } else {
            CliError { code: "config", message: err.to_string(), context: context.to_string(), exit: 1 }
        }
    }

    fn report(&self) -> ExitCode {
        let line = json!({ "code": self.code, "message": self.message, "context": self.context });
        eprintln!("{line}");
        ExitCode::from(self.exit)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let message = e.to_string();
            let first = message.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            return CliError::config(first, "arguments").report();
        }
    };
    let outcome = RunConfig::resolve(cli.protocol, &cli.flags).and_then(|config| run::execute(&config));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.report(),
    }
}
