mod args;
mod commands;
mod output;
mod states;

use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches};
use serde_json::json;

use args::Cli;
use precession_core::Error;

/// Failure categories mapped onto exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(Error::Json(e))
    }
}

impl CliError {
    fn kind_and_code(&self) -> (&'static str, u8) {
        match self {
            CliError::Usage(_) => ("usage", 2),
            CliError::Core(e) if e.is_numerical() => ("numerical", 3),
            CliError::Core(Error::Io(_)) => ("io", 1),
            CliError::Core(_) => ("usage", 2),
        }
    }

    fn report(&self) -> ExitCode {
        let (kind, code) = self.kind_and_code();
        let message = match self {
            CliError::Usage(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
        };
        eprintln!("{}", json!({ "error": kind, "message": message, "exit_code": code }));
        ExitCode::from(code)
    }
}

fn version_string() -> String {
    format!(
        "{} (precession-core {}, format version {})",
        env!("CARGO_PKG_VERSION"),
        precession_core::VERSION,
        precession_core::FORMAT_VERSION
    )
}

fn main() -> ExitCode {
    let cmd = Cli::command().version(version_string());
    let matches = match cmd.try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.render().to_string();
            return CliError::Usage(text.trim().to_string()).report();
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => return CliError::Usage(e.to_string()).report(),
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.report(),
    }
}
