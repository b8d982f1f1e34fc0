//! Command-line front end for `transop`: filter files in, JSON/CSV reports out.

pub mod args;
pub mod commands;
pub mod error;
pub mod filefmt;
pub mod report;

use args::{Cli, Command};
use commands::Outcome;
use error::CliError;
use report::OutDir;

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "TRANSOP_THREADS";

/// Applies [`THREADS_ENV`] to the global thread pool; returns the cap if one was set.
pub fn configure_threads() -> Result<Option<usize>, CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(None);
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV}={raw:?} is not a positive integer")))?;
    // a pool may already exist when embedded; the cap then cannot change
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(Some(n))
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let mut out = OutDir::create(&cli.out)?;
    match &cli.command {
        Command::Validate { file, tol, grid } => commands::validate(file, *tol, *grid, &mut out),
        Command::Harmonic { file, degree, tol } => commands::harmonic(file, *degree, *tol, &mut out),
        Command::Analyze { sub } => commands::analyze(sub, &mut out),
    }
}
