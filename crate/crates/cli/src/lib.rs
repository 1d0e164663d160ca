//! Command-line front end: expression parsing, potential files, subcommand
//! orchestration and reports.
//!
//! Exit codes: 0 all checks pass, 1 verification failure, 2 input error,
//! 3 numerical non-convergence.

pub mod commands;
pub mod config;
pub mod error;
pub mod parse;
pub mod potfile;
pub mod report;

use std::ffi::OsString;

use clap::Parser;

use crate::commands::{execute, Outcome};
use crate::config::{Command, RunConfig};
use crate::error::{EXIT_FAIL, EXIT_INPUT, EXIT_NONCONVERGENCE};

#[derive(Debug, Parser)]
#[command(name = "dispersio", version, about = "Checks for Frobenius manifolds, their hierarchies and deformations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub config: RunConfig,
}

/// Runs a parsed command line and returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli.command, &cli.config) {
        Ok((report, outcome)) => {
            print!("{}", report.summary());
            if outcome == Outcome::NonConvergence {
                EXIT_NONCONVERGENCE
            } else if report.failed() {
                EXIT_FAIL
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Parses `args` (including the program name) and runs.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            code
        }
    }
}
