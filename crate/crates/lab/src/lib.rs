//! Verification experiments for PRLMC.
//!
//! Each experiment reads an [`ExperimentConfig`], runs seeded trials in
//! parallel, compares the estimates with the closed-form bounds from
//! [`prlmc_core::theory`] and the exact moment recursions from
//! [`prlmc_core::metrics`], and produces an [`ExperimentReport`] of verdicts,
//! CSV tables and raw sample batches.
//!
//! Every trial draws from its own derived random streams and all reductions
//! run in trial order, so the output depends only on the configuration and
//! the seed, never on the thread count.

pub mod config;
pub mod error;
mod experiments;
pub mod report;

use std::path::PathBuf;

pub use config::{Experiment, ExperimentConfig, Params};
pub use error::{LabError, LabResult};
pub use report::{ExperimentReport, Status, Table, Verdict};

/// Environment variable read when no thread count is given.
pub const THREADS_ENV: &str = "PRLMC_LAB_THREADS";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Root output directory; `None` keeps the report in memory only.
    pub out: Option<PathBuf>,
    /// Worker threads; `None` defers to [`THREADS_ENV`], then to rayon's default.
    pub threads: Option<usize>,
}

fn thread_count(explicit: Option<usize>) -> LabResult<Option<usize>> {
    if let Some(n) = explicit {
        return Ok(Some(n));
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| LabError::config(format!("{THREADS_ENV}={v:?} is not a thread count"))),
        Err(_) => Ok(None),
    }
}

/// Runs one experiment and, when an output directory is given, writes its files.
pub fn run_experiment(
    experiment: Experiment,
    config: &ExperimentConfig,
    options: &RunOptions,
) -> LabResult<ExperimentReport> {
    config.check(experiment)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count(options.threads)? {
        builder = builder.num_threads(n);
    }
    let pool = builder.build()?;
    let mut report = pool.install(|| experiments::execute(experiment, config))?;
    report.finish();
    let out = options.out.clone().or_else(|| config.output.clone());
    if let Some(root) = out {
        report.write(&root)?;
    }
    Ok(report)
}
