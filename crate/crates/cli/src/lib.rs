//! Experiment harness for the `fhl` binary.
//!
//! Each registered experiment maps to a fixed computation over the core
//! numerics and produces a [`RunReport`] with a table and pass/fail verdicts.

pub mod config;
pub mod experiments;
pub mod report;
pub mod validate;
pub mod weight;

use std::path::PathBuf;
use std::time::Instant;

pub use config::{Args, Experiment, ExperimentConfig, Format};
pub use report::{Cell, RunReport, Table, Verdict};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] fhl_core::Error),
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for usage and I/O problems, 3 for numerical inconsistencies.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

/// `(name, description)` in registry order.
pub fn list_experiments() -> Vec<(&'static str, &'static str)> {
    Experiment::ALL
        .iter()
        .map(|e| (e.name(), e.description()))
        .collect()
}

/// Runs one experiment and stamps the wall time. Nothing is written.
pub fn run(config: &ExperimentConfig) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let mut report = experiments::run_experiment(config)?;
    report.wall_time = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Runs and writes the report; returns the path written.
pub fn run_to_file(config: &ExperimentConfig) -> Result<(RunReport, PathBuf), CliError> {
    let report = run(config)?;
    let path = config.out_path();
    report.write(&path, config.format)?;
    Ok((report, path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_is_stable() {
        let names: Vec<_> = list_experiments().into_iter().map(|(n, _)| n).collect();
        assert_eq!(
            names,
            [
                "bcp-sweep",
                "mo-decay",
                "imo-integral",
                "ida-check",
                "entire-symbol",
                "compactness-probe",
                "validate"
            ]
        );
        assert!(list_experiments().iter().all(|(_, d)| !d.is_empty()));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        let numerical = fhl_core::Error::from(fhl_core::SpectraError::NegativeEigenvalue {
            value: -1.0,
            tol: 1e-8,
        });
        assert_eq!(CliError::Core(numerical).exit_code(), 3);
    }
}
