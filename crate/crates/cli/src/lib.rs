//! Command-line front end for the `nesteq` tools.
//!
//! Exit codes: 0 command ok, 10 sat, 20 unsat-certified, 30 unknown,
//! 1 usage error, 2 input error.

mod args;
mod commands;
mod corpus;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;

pub use args::{Cli, Command, Engine, Gen, RunConfig};
pub use commands::header_logic;
pub use corpus::{corpus_run, Entry};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SAT: i32 = 10;
pub const EXIT_UNSAT: i32 = 20;
pub const EXIT_UNKNOWN: i32 = 30;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Parse `argv` (program name first), run, and return the exit code.
/// Diagnostics go to standard error.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_INPUT
        }
    }
}

fn dispatch(cli: &Cli) -> anyhow::Result<i32> {
    let cfg = &cli.run;
    match &cli.command {
        Command::Check { formula } => commands::check(formula, cfg),
        Command::Oracle { formula, exact, engine } => commands::oracle(formula, *exact, *engine, cfg),
        Command::Normalize { formula } => commands::normalize(formula, cfg),
        Command::Verify { model, formula } => commands::verify(model, formula, cfg),
        Command::Pump { model, formula } => commands::pump(model, formula, cfg),
        Command::Gen(Gen::Tiling { instance, witness }) => commands::gen_tiling(instance, witness.as_deref(), cfg),
        Command::Gen(Gen::Tcm { machine, witness, steps }) => {
            commands::gen_tcm(machine, witness.as_deref(), *steps, cfg)
        }
        Command::Gen(Gen::Corpus { dir, count }) => commands::gen_corpus(dir, *count, cfg),
        Command::Corpus { dir, agree } => corpus::corpus(dir, *agree, cfg),
    }
}
