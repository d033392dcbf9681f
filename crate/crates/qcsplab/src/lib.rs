//! The qcsplab command-line tool: gadget construction, sentence evaluation,
//! polymorphism enumeration, power-growth analysis and the verification
//! sweeps, with structured deterministic reports.

pub mod cli;
pub mod commands;
pub mod error;
pub mod report;
pub mod suites;

use std::collections::BTreeMap;
use std::time::Instant;

use cli::Cli;
use error::CliError;
use report::Report;

/// Run one parsed invocation: dispatch, write the report when requested,
/// and hand back the process exit code.
pub fn run(cli: &Cli) -> Result<i32, CliError> {
    let started = Instant::now();
    let outcome = commands::dispatch(cli)?;
    let mut timings = BTreeMap::new();
    timings.insert("total".to_string(), started.elapsed().as_millis());
    let report = Report::new(outcome.command, outcome.digest, outcome.payload, timings);
    if let Some(path) = &cli.report {
        report.write(path).map_err(|source| CliError::Write {
            path: path.display().to_string(),
            source,
        })?;
    }
    Ok(outcome.exit)
}
