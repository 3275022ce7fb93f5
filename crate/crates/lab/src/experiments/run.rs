//! Independent chains with checkpointed state.
//!
//! Tables: `checkpoints.csv` (`step, time, count, mean_norm2, se_norm2,
//! mean_x0, se_x0, oracle_norm2`), `divergences.csv` (`trial, step`).
//! Batches: `step_<n>` for every checkpoint.

use prlmc_core::metrics::{quadratic_prlmc_moment_oracle, MeanEstimate, SampleBatch};
use prlmc_core::sampler::{run_chain, Algorithm};
use prlmc_core::Error;

use super::par_map;
use crate::config::ExperimentConfig;
use crate::error::LabResult;
use crate::report::{Cell, ExperimentReport, Table, Verdict};

/// Exact `E|X_n|²` when the configuration has one: ULA is PRLMC with `K = 1`.
fn oracle(cfg: &ExperimentConfig, steps: u64) -> Option<Vec<f64>> {
    let theta = cfg.sampler.potential.isotropic_theta()?;
    let eta = cfg.sampler.schedule.constant_eta()?;
    let k = match cfg.sampler.algorithm {
        Algorithm::Ula => 1,
        Algorithm::Prlmc { k } => k,
        _ => return None,
    };
    let x0: f64 = cfg.sampler.initial.iter().map(|v| v * v).sum();
    let d = cfg.dimension();
    quadratic_prlmc_moment_oracle(theta, eta, k, d, x0, steps as usize)
        .ok()
        .map(|(traj, _)| traj)
}

pub(super) fn execute(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> LabResult<()> {
    for w in cfg.sampler.validate()? {
        report.warnings.push(w);
    }
    let steps = cfg.steps;
    let checkpoints: Vec<u64> = if cfg.checkpoints.is_empty() {
        vec![steps]
    } else {
        cfg.checkpoints.clone()
    };
    if checkpoints.last().is_some_and(|&c| c > steps) {
        return Err(crate::LabError::config("checkpoints must not exceed steps"));
    }
    let results = par_map(cfg.trials, |t| run_chain(&cfg.sampler, t, steps, &checkpoints));

    let d = cfg.dimension();
    let mut diverged = Table::new("divergences", &["trial", "step"]);
    let mut finished = Vec::new();
    for (t, r) in results.into_iter().enumerate() {
        match r {
            Ok(run) => finished.push(run),
            Err(Error::Divergence { step }) => diverged.push(vec![(t as u64).into(), step.into()]),
            Err(e) => return Err(e.into()),
        }
    }
    if !diverged.rows.is_empty() {
        report.warnings.push(format!("{} of {} trials diverged", diverged.rows.len(), cfg.trials));
    }

    let exact = oracle(cfg, steps);
    let mut table = Table::new(
        "checkpoints",
        &["step", "time", "count", "mean_norm2", "se_norm2", "mean_x0", "se_x0", "oracle_norm2"],
    );
    for (j, &c) in checkpoints.iter().enumerate() {
        if finished.is_empty() {
            break;
        }
        let norm2 = MeanEstimate::from_iter(finished.iter().map(|r| r.checkpoints[j].norm2))?;
        let x0 = MeanEstimate::from_iter(finished.iter().map(|r| r.checkpoints[j].position[0]))?;
        let reference = exact.as_ref().map(|t| t[c as usize]);
        table.push(vec![
            c.into(),
            finished[0].checkpoints[j].elapsed_time.into(),
            finished.len().into(),
            norm2.mean.into(),
            Cell::Float(norm2.se),
            x0.mean.into(),
            Cell::Float(x0.se),
            reference.unwrap_or(f64::NAN).into(),
        ]);
        let values: Vec<f64> = finished
            .iter()
            .flat_map(|r| r.checkpoints[j].position.iter().copied())
            .collect();
        report.batches.push((format!("step_{c}"), SampleBatch::new(d, values)?));
        if j + 1 == checkpoints.len() {
            report.estimate("terminal_mean_norm2", norm2.mean, norm2.se);
            if let Some(reference) = reference {
                if norm2.n > 1 {
                    report.verdict(
                        Verdict::new("terminal second moment matches the exact recursion", "quadratic moment recursion")
                            .agrees(norm2.mean, norm2.se, reference, cfg.params.z),
                    );
                }
            }
        }
    }
    if steps > 0 && !finished.is_empty() {
        let rate = MeanEstimate::from_iter(finished.iter().map(|r| r.gradient_evals as f64 / steps as f64))?;
        report.estimate("gradient_evals_per_step", rate.mean, rate.se);
    }
    if !cfg.params.write_samples {
        report.batches.clear();
    }
    report.tables.push(table);
    report.tables.push(diverged);
    Ok(())
}
