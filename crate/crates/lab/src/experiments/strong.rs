//! One-step strong error `‖X_γ − Ỹ_γ‖₂` between the diffusion and PRLMC,
//! both started at the configured state and driven by the same noise.
//!
//! Table `strong.csv`: `gamma, rms, rms_se, mean_sq, mean_sq_se`.

use prlmc_core::metrics::{fit_loglog_slope, MeanEstimate};
use prlmc_core::sampler::coupled_step_ou;

use super::{par_map, tags};
use crate::config::ExperimentConfig;
use crate::error::{LabError, LabResult};
use crate::report::{ExperimentReport, Status, Table, Verdict};

const REFERENCE: &str = "one-step strong error of order γ^(3/2)";

pub(super) fn execute(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> LabResult<()> {
    let theta = cfg.theta()?;
    let k = cfg.k()?;
    let p = &cfg.params;
    if cfg.eta_grid.len() < 3 {
        return Err(LabError::config("strong-error needs at least three step sizes in eta_grid"));
    }
    let x0 = cfg.sampler.initial.clone();
    let mut table = Table::new("strong", &["gamma", "rms", "rms_se", "mean_sq", "mean_sq_se"]);
    let mut rms = Vec::new();
    for (i, &gamma) in cfg.eta_grid.iter().enumerate() {
        let policy = cfg.sampler.rng.fork(tags::GRID).fork(i as u64);
        let values: Vec<f64> = par_map(cfg.trials, |t| {
            let mut noise = policy.step_noise(t, 0);
            coupled_step_ou(&x0, &x0, theta, gamma, k, &mut noise)
                .map(|(x, y)| x.iter().zip(&y).map(|(u, v)| (u - v).powi(2)).sum::<f64>())
        })
        .into_iter()
        .collect::<Result<_, _>>()?;
        let sq = MeanEstimate::from_iter(values)?;
        let r = sq.mean.sqrt();
        // Delta method for the square root.
        let r_se = if r > 0.0 { sq.se / (2.0 * r) } else { f64::NAN };
        table.push(vec![gamma.into(), r.into(), r_se.into(), sq.mean.into(), sq.se.into()]);
        report.estimate(format!("rms[gamma={gamma}]"), r, r_se);
        rms.push(r);
    }
    report.tables.push(table);

    let (lo, hi) = p.slope_window.unwrap_or((1.3, 1.7));
    let min_r2 = p.min_r2.unwrap_or(0.98);
    match fit_loglog_slope(&cfg.eta_grid, &rms) {
        Ok(fit) => {
            report.estimate("strong_error_slope", fit.slope, fit.slope_se);
            report.verdict(
                Verdict::new(format!("log-log slope of strong error in [{lo}, {hi}] with r² ≥ {min_r2}"), REFERENCE)
                    .holds(fit.slope, Some(1.5), (lo..=hi).contains(&fit.slope) && fit.r2 >= min_r2)
                    .note(format!("r² = {:.5}", fit.r2)),
            );
        }
        Err(e) => report.verdict(
            Verdict::new("log-log slope of strong error", REFERENCE)
                .note(e.to_string())
                .status(Status::Inconclusive),
        ),
    }
    Ok(())
}
