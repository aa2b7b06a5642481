//! Command-line driver for `riesz-spectrum`: JSON reports, certificates and an
//! independent `verify` pass.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod commands;
pub mod error;
pub mod exact;
pub mod input;
pub mod json;
pub mod verify;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

use crate::cli::{Cli, Command, Output};
use crate::commands::Outcome;
use crate::error::{CliError, Result};

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<u8> {
    let (outcome, output) = match command {
        Command::Spectrum {
            input,
            delta,
            output,
        } => (commands::spectrum(&input, delta)?, output),
        Command::Approximate {
            input,
            eta,
            method,
            max_terms,
            range,
            output,
        } => (
            commands::approximate(&input, eta, method, max_terms, range)?,
            output,
        ),
        Command::Chang {
            input,
            delta,
            f2,
            range,
            output,
        } => (commands::chang(&input, delta, f2, range)?, output),
        Command::Bloom {
            input,
            delta,
            scan_limit,
            range,
            output,
        } => (commands::bloom(&input, delta, scan_limit, range)?, output),
        Command::WeakChang {
            input,
            delta,
            range,
            output,
        } => (commands::weak_chang(&input, delta, range)?, output),
        Command::Dual {
            input,
            delta,
            output,
        } => (commands::dual(&input, delta)?, output),
        Command::Verify {
            certificate,
            input,
            kind,
        } => return run_verify(&certificate, &input, kind.as_deref()),
    };
    emit(outcome, &output)
}

fn emit(outcome: Outcome, output: &Output) -> Result<u8> {
    let text = json::render(&outcome.report);
    if let Some(path) = &output.out {
        json::write_atomic(path, &text)?;
    }
    let mut stdout = std::io::stdout().lock();
    stdout
        .write_all(text.as_bytes())
        .and_then(|_| stdout.flush())
        .map_err(|source| CliError::Write {
            path: "<stdout>".into(),
            source,
        })?;
    if outcome.failures.is_empty() {
        Ok(0)
    } else {
        for f in &outcome.failures {
            eprintln!("failed: {f}");
        }
        Ok(1)
    }
}

fn run_verify(path: &std::path::Path, input: &cli::Input, kind: Option<&str>) -> Result<u8> {
    let checks = verify::verify(path, input, kind)?;
    for c in &checks {
        let status = if c.ok { "ok  " } else { "FAIL" };
        println!("{status} {}: {}", c.name, c.detail);
    }
    match checks.iter().find(|c| !c.ok) {
        Some(first) => {
            eprintln!("verification failed at `{}`: {}", first.name, first.detail);
            Ok(1)
        }
        None => Ok(0),
    }
}
