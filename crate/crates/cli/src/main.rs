//! `snapfuzz` command-line tool.
//!
//! Exit codes: 0 budget exhausted / replay match / success, 1 bug found or
//! replay mismatch, 2 usage or configuration error, 3 I/O failure.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

pub const EXIT_BUG: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_IO: u8 = 3;

/// An error together with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn config(error: impl Into<anyhow::Error>) -> Self {
        Failure { code: EXIT_CONFIG, error: error.into() }
    }

    pub fn io(error: impl Into<anyhow::Error>) -> Self {
        Failure { code: EXIT_IO, error: error.into() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fuzz(a) => commands::fuzz(&a),
        Command::Replay(a) => commands::replay(&a),
        Command::Bench(a) => commands::bench(&a),
        Command::Asm(a) => commands::asm(&a),
        Command::DumpCorpus(a) => commands::dump_corpus(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
