//! Report generation for the `bergman` command-line tool: configuration,
//! the kernel/verify/symd/injectivity commands and their JSON and CSV output.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use commands::{execute, Command};
pub use config::{Overrides, Resolved, RunConfig};
pub use error::{CliError, Result};
pub use report::Report;

/// Runs a command and writes its report into the configured output
/// directory. Failed bound checks are reported after the files are written.
pub fn run(command: Command, res: &Resolved) -> Result<Report> {
    let report = execute(command, res)?;
    report.write(&res.config.output)?;
    if let Some((failed, total)) = report.checks {
        if failed > 0 {
            return Err(CliError::ChecksFailed { failed, total });
        }
    }
    Ok(report)
}
