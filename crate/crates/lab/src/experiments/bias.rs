//! Stationary bias of PRLMC as a function of the step size.
//!
//! For each `η` in the grid, `trials` chains are burnt in for `10/(mη)` steps
//! and then sampled every `⌈1/(mη)⌉` steps until `params.samples` draws are
//! pooled. `W₂(π̂_η, π)` is estimated coordinatewise against the stratified
//! Gaussian target.
//!
//! Table `bias.csv`: `eta, admissible, samples, w2, w2_se, w2_squared,
//! mean_norm2, se_norm2, oracle_norm2, trend_z, sqrt_bound, sharp_bound`.
//! Batches: `stationary_eta_<i>`.

use prlmc_core::metrics::{anisotropic_fixed_point, fit_loglog_slope, MeanEstimate, SampleBatch};
use prlmc_core::schedule::StepSchedule;
use prlmc_core::theory::{find_eta0, w2_bias_bound_sharp, w2_bias_bound_sqrt, TheoryBounds};

use super::{
    config_with_schedule, constants, gaussian_variances, grouped, relaxation_steps, stationary_draws, tags,
    w2_coordinatewise,
};
use crate::config::ExperimentConfig;
use crate::error::{LabError, LabResult};
use crate::report::{Cell, ExperimentReport, Status, Table, Verdict};

const SQRT_REF: &str = "stationary bias bound of order √η";
const SHARP_REF: &str = "stationary bias bound of order η";

/// Two-sample z statistic comparing the mean of `|x|²` over the first and the
/// second half of every chain's draws.
fn trend_z(draws: &[Vec<Vec<f64>>]) -> LabResult<f64> {
    let mut first = Vec::new();
    let mut second = Vec::new();
    for chain in draws {
        let half = chain.len() / 2;
        if half == 0 {
            continue;
        }
        let mean = |xs: &[Vec<f64>]| xs.iter().map(|x| super::norm2(x)).sum::<f64>() / xs.len() as f64;
        first.push(mean(&chain[..half]));
        second.push(mean(&chain[half..]));
    }
    if first.len() < 2 {
        return Ok(0.0);
    }
    let a = MeanEstimate::from_iter(first)?;
    let b = MeanEstimate::from_iter(second)?;
    Ok((b.mean - a.mean) / (a.se * a.se + b.se * b.se).sqrt())
}

pub(super) fn execute(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> LabResult<()> {
    let k = cfg.k()?;
    let variances = gaussian_variances(cfg)?;
    let (m, l, l_tilde) = constants(cfg);
    let d = cfg.dimension();
    let p = &cfg.params;
    if cfg.eta_grid.len() < 4 {
        return Err(LabError::config("bias-sweep needs at least four step sizes in eta_grid"));
    }
    let ratios: Vec<f64> = cfg.eta_grid.windows(2).map(|w| w[1] / w[0]).collect();
    if ratios.iter().any(|r| (r / ratios[0] - 1.0).abs() > 1e-6) {
        report.warnings.push("eta_grid is not geometric".into());
    }
    let eta0 = find_eta0(m, l, k)?;
    let spectrum: Vec<f64> = variances.iter().map(|v| 1.0 / v).collect();

    let mut table = Table::new(
        "bias",
        &[
            "eta", "admissible", "samples", "w2", "w2_se", "w2_squared", "mean_norm2", "se_norm2",
            "oracle_norm2", "trend_z", "sqrt_bound", "sharp_bound",
        ],
    );
    let mut theory = Vec::new();
    let mut fit_eta = Vec::new();
    let mut fit_w2 = Vec::new();
    for (i, &eta) in cfg.eta_grid.iter().enumerate() {
        let bounds = TheoryBounds::evaluate(m, l, l_tilde, k, d, eta)?;
        theory.push(bounds.clone());
        if eta >= eta0 {
            report.warnings.push(format!("η = {eta} is not below η₀ = {eta0:.6}; skipped"));
            table.push(vec![
                eta.into(),
                false.into(),
                0u64.into(),
                f64::NAN.into(),
                f64::NAN.into(),
                f64::NAN.into(),
                f64::NAN.into(),
                f64::NAN.into(),
                f64::NAN.into(),
                f64::NAN.into(),
                bounds.w2_sqrt_bound.into(),
                bounds.w2_sharp_bound.into(),
            ]);
            continue;
        }
        let policy = cfg.sampler.rng.fork(tags::GRID).fork(i as u64);
        let sampler = config_with_schedule(cfg, StepSchedule::constant(eta)?, policy);
        let per_chain = p.samples.div_ceil(cfg.trials);
        let draws = stationary_draws(
            &sampler,
            cfg.trials,
            per_chain,
            relaxation_steps(m, eta, 10.0),
            relaxation_steps(m, eta, 1.0),
        )?;
        let trend = trend_z(&draws)?;
        // Chain-level means keep the standard error honest under autocorrelation.
        let chain_m2 = MeanEstimate::from_iter(
            draws
                .iter()
                .map(|c| c.iter().map(|x| super::norm2(x)).sum::<f64>() / c.len() as f64),
        )?;
        // Interleave chains so every group used for the standard error mixes
        // all of them.
        let mut values = Vec::with_capacity((per_chain * cfg.trials) as usize * d);
        for j in 0..per_chain as usize {
            for chain in &draws {
                values.extend_from_slice(&chain[j]);
            }
        }
        let batch = SampleBatch::new(d, values)?;
        let (w2, w2_se) = grouped(&batch, p.groups, |b| w2_coordinatewise(b, &variances))?;
        let oracle = anisotropic_fixed_point(&spectrum, eta, k).ok();
        let m2_for_bound = oracle.unwrap_or(chain_m2.mean);
        let sqrt_bound = w2_bias_bound_sqrt(m, l, k, d, eta, m2_for_bound);
        let sharp_bound = w2_bias_bound_sharp(m, l, l_tilde, k, d, eta)?;

        table.push(vec![
            eta.into(),
            true.into(),
            (batch.len() as u64).into(),
            w2.into(),
            Cell::Float(w2_se),
            (w2 * w2).into(),
            chain_m2.mean.into(),
            chain_m2.se.into(),
            oracle.unwrap_or(f64::NAN).into(),
            trend.into(),
            sqrt_bound.into(),
            sharp_bound.into(),
        ]);
        report.estimate(format!("w2[eta={eta}]"), w2, w2_se);
        report.estimate(format!("mean_norm2[eta={eta}]"), chain_m2.mean, chain_m2.se);
        report.verdict(
            Verdict::new(format!("W2 ≤ √η bias bound at η = {eta}"), SQRT_REF).at_most(w2, w2_se, sqrt_bound, p.z),
        );
        if bounds.sharp_bound_admissible {
            report.verdict(
                Verdict::new(format!("W2² ≤ order-η bias bound at η = {eta}"), SHARP_REF).at_most(
                    w2 * w2,
                    2.0 * w2 * w2_se,
                    sharp_bound,
                    p.z,
                ),
            );
        }
        if let Some(fp) = oracle {
            report.verdict(
                Verdict::new(
                    format!("stationary second moment matches the exact recursion at η = {eta}"),
                    "quadratic moment recursion",
                )
                .agrees(chain_m2.mean, chain_m2.se, fp, p.z),
            );
        }
        if trend.abs() > 4.0 {
            report.verdict(
                Verdict::new(format!("no drift in the second-moment trace at η = {eta}"), "stationarity heuristic")
                    .holds(trend, Some(4.0), false)
                    .status(Status::Inconclusive),
            );
        }
        fit_eta.push(eta);
        fit_w2.push(w2);
        if p.write_samples {
            report.batches.push((format!("stationary_eta_{i}"), batch));
        }
    }
    report.theory = serde_json::to_value(&theory)?;
    report.tables.push(table);

    let (lo, hi) = p.slope_window.unwrap_or((0.9, f64::INFINITY));
    let min_r2 = p.min_r2.unwrap_or(0.9);
    if fit_eta.len() >= 3 {
        let fit = fit_loglog_slope(&fit_eta, &fit_w2)?;
        report.estimate("bias_slope", fit.slope, fit.slope_se);
        report.estimate("bias_slope_r2", fit.r2, 0.0);
        report.verdict(
            Verdict::new(format!("log-log slope of W2 bias vs η in [{lo}, {hi}] with r² ≥ {min_r2}"), SHARP_REF)
                .holds(fit.slope, Some(lo), (lo..=hi).contains(&fit.slope) && fit.r2 >= min_r2)
                .note(format!("r² = {:.4}", fit.r2)),
        );
    } else {
        report.verdict(
            Verdict::new("log-log slope of W2 bias vs η", SHARP_REF)
                .note("fewer than three admissible step sizes")
                .status(Status::Inconclusive),
        );
    }
    Ok(())
}
