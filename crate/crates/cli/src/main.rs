//! `weakamp` command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error,
//! 3 vanishing postselection, 4 I/O error.

mod args;
mod commands;
mod config;
mod csv;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

#[derive(Debug)]
pub enum CliError {
    VerifyFailed(String),
    Usage(String),
    Vanishing(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::VerifyFailed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Vanishing(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::VerifyFailed(m) => write!(f, "verification failed: {m}"),
            CliError::Usage(m) | CliError::Vanishing(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<weakamp::Error> for CliError {
    fn from(e: weakamp::Error) -> Self {
        match e {
            weakamp::Error::VanishingPostselection { .. } => CliError::Vanishing(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

fn print(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| CliError::Io(format!("cannot write to standard output: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Shift(a) => print(&commands::shift(a)?),
        Command::Max(a) => print(&commands::max(a)?),
        Command::Optimize(a) => print(&commands::optimize(a)?),
        Command::Fig(a) => match commands::fig(a)? {
            Some(text) => print(&text),
            None => Ok(()),
        },
        Command::Verify(a) => {
            let (text, offender) = commands::verify(a)?;
            print(&text)?;
            match offender {
                Some(worst) => Err(CliError::VerifyFailed(worst)),
                None => Ok(()),
            }
        }
    }
}

fn main() -> ExitCode {
    let args: Vec<OsString> = std::env::args_os().collect();
    let result = config::splice(args).and_then(|args| match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            std::process::exit(e.exit_code());
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("weakamp: {e}");
            ExitCode::from(e.code())
        }
    }
}
