//! Command-line runner: configuration, verification runs and reports.
//!
//! The binary `bcl` is a thin wrapper around [`main_with`].

pub mod config;
pub mod error;
pub mod report;
pub mod run;

use std::process::ExitCode;

pub use config::{Cli, Command, FileConfig, Format, RunConfig};
pub use error::CliError;
pub use report::{emit_plotdata, parse_plotdata, strip_wall_time, Check, Report, ScanData, Status};
pub use run::{emit, run};

/// Caps the rayon pool at `BCL_THREADS` workers when set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("BCL_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|n| *n >= 1).ok_or_else(|| {
        CliError::bad_config("BCL_THREADS", format!("expected a count >= 1, got `{raw}`"))
    })?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::bad_config("BCL_THREADS", e.to_string()))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

pub fn main_with(cli: Cli) -> Result<ExitCode, CliError> {
    configure_threads()?;
    let file = match &cli.opts.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let config = RunConfig::resolve(Command::from_cli(&cli.command), &cli.opts, &file)?;
    let report = run(config)?;
    if let Some(body) = emit(&report)? {
        print!("{body}");
    }
    let failed: Vec<&str> = report
        .checks
        .iter()
        .filter(|c| c.status == Status::Fail)
        .map(|c| c.name.as_str())
        .collect();
    if failed.is_empty() {
        eprintln!(
            "{}: pass ({} checks)",
            report.config.command,
            report.checks.len()
        );
    } else {
        eprintln!("{}: FAIL: {}", report.config.command, failed.join(", "));
    }
    Ok(ExitCode::from(report.exit_code() as u8))
}
