//! `partex`: command-line front end.
//!
//! Every invocation prints exactly one JSON report on stdout. Exit codes:
//! 0 on success, 1 for runtime or domain errors, 2 for usage errors.

mod args;
mod commands;
mod io;

use std::path::Path;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::{json, Value};

use args::Cli;

pub const REPORT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Runtime(format!("{}: {err}", path.display()))
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Runtime(_) => "runtime",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => m,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<partex_core::Error> for CliError {
    fn from(e: partex_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn emit(report: Value) {
    println!("{}", serde_json::to_string(&report).expect("report serializes"));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let argv: Vec<String> = std::env::args().skip(1).collect();
            let message = e.render().to_string();
            emit(json!({
                "command": argv.first().cloned().unwrap_or_default(),
                "version": REPORT_VERSION,
                "inputs": { "argv": argv },
                "seed": null,
                "error": { "kind": "usage", "message": message.trim_end() },
            }));
            return ExitCode::from(2);
        }
    };

    let outcome = commands::run(cli.command);
    let mut report = json!({
        "command": outcome.command,
        "version": REPORT_VERSION,
        "inputs": outcome.inputs,
        "seed": outcome.seed.map(|s| s.0),
    });
    match outcome.result {
        Ok(result) => {
            report["result"] = result;
            emit(report);
            ExitCode::SUCCESS
        }
        Err(err) => {
            report["error"] = json!({ "kind": err.kind(), "message": err.message() });
            emit(report);
            ExitCode::from(err.exit_code())
        }
    }
}
