//! Total-variation decay of `L(X̃_n)` towards the stationary law `π_η`.
//!
//! `trials` chains start from the configured state; their histograms at each
//! checkpoint are compared with a pooled stationary batch from
//! `params.reference_chains` long chains. A second, independent pooled batch
//! gives the estimation noise floor.
//!
//! Table `tv.csv`: `step, tv, in_window`. Batches: `terminal`, `reference`.

use prlmc_core::metrics::{linear_fit, Histogram, SampleBatch};
use prlmc_core::sampler::Chain;

use super::{relaxation_steps, stationary_draws, tags};
use crate::config::ExperimentConfig;
use crate::error::{LabError, LabResult};
use crate::report::{ExperimentReport, Status, Table, Verdict};

const REFERENCE: &str = "geometric ergodicity in total variation";

/// Chains handled per parallel task.
const BLOCK: u64 = 4096;

fn pooled_histogram(cfg: &ExperimentConfig, tag: u64, eta: f64) -> LabResult<(Histogram, Vec<f64>)> {
    let p = &cfg.params;
    let m = cfg.sampler.potential.m();
    let mut sampler = cfg.sampler.clone();
    sampler.rng = cfg.sampler.rng.fork(tag);
    let per_chain = p.samples.div_ceil(p.reference_chains);
    let draws = stationary_draws(
        &sampler,
        p.reference_chains,
        per_chain,
        relaxation_steps(m, eta, 10.0),
        relaxation_steps(m, eta, 1.0),
    )?;
    let mut h = Histogram::new(p.bins, p.range.0, p.range.1)?;
    let values: Vec<f64> = draws.iter().flatten().map(|x| x[0]).collect();
    h.extend(values.iter().copied());
    Ok((h, values))
}

pub(super) fn execute(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> LabResult<()> {
    let eta = cfg.eta()?;
    let p = &cfg.params;
    if cfg.dimension() != 1 {
        return Err(LabError::config("tv-decay is restricted to one-dimensional targets"));
    }
    if p.reference_chains == 0 {
        return Err(LabError::config("params.reference_chains must be positive"));
    }
    if cfg.steps == 0 {
        return Err(LabError::config("tv-decay needs steps > 0"));
    }
    for w in cfg.sampler.validate()? {
        report.warnings.push(w);
    }
    let checkpoints: Vec<u64> = if cfg.checkpoints.is_empty() {
        (0..=cfg.steps).step_by((cfg.steps / 100).max(1) as usize).collect()
    } else {
        cfg.checkpoints.clone()
    };
    if checkpoints.last().is_some_and(|&c| c > cfg.steps) {
        return Err(LabError::config("checkpoints must not exceed steps"));
    }
    let empty = Histogram::new(p.bins, p.range.0, p.range.1)?;

    let blocks = cfg.trials.div_ceil(BLOCK);
    let partial = super::par_map(blocks, |b| -> LabResult<(Vec<Histogram>, Vec<f64>)> {
        let lo = b * BLOCK;
        let hi = ((b + 1) * BLOCK).min(cfg.trials);
        let mut chains: Vec<Chain> = (lo..hi)
            .map(|t| Chain::new(&cfg.sampler, t))
            .collect::<Result<_, _>>()?;
        let mut hists = vec![empty.clone(); checkpoints.len()];
        let mut step = 0;
        for (j, &c) in checkpoints.iter().enumerate() {
            while step < c {
                for chain in &mut chains {
                    chain.step()?;
                }
                step += 1;
            }
            hists[j].extend(chains.iter().map(|ch| ch.position()[0]));
        }
        let last = chains.iter().map(|ch| ch.position()[0]).collect();
        Ok((hists, last))
    });
    let mut hists = vec![empty.clone(); checkpoints.len()];
    let mut terminal = Vec::with_capacity(cfg.trials as usize);
    for block in partial {
        let (h, last) = block?;
        for (a, b) in hists.iter_mut().zip(&h) {
            a.merge(b)?;
        }
        terminal.extend(last);
    }

    let (reference, reference_values) = pooled_histogram(cfg, tags::REFERENCE_A, eta)?;
    let (second, _) = pooled_histogram(cfg, tags::REFERENCE_B, eta)?;
    let floor = reference.tv(&second)?;
    // The floor itself is the standard-error scale of every TV estimate.
    report.estimate("tv_noise_floor", floor, floor);

    let tvs: Vec<f64> = hists.iter().map(|h| h.tv(&reference)).collect::<Result<_, _>>()?;
    let in_window: Vec<bool> = tvs
        .iter()
        .map(|&tv| tv >= 5.0 * floor && tv <= p.saturation)
        .collect();
    let mut table = Table::new("tv", &["step", "tv", "in_window"]);
    for ((&c, &tv), &w) in checkpoints.iter().zip(&tvs).zip(&in_window) {
        table.push(vec![c.into(), tv.into(), w.into()]);
    }
    report.tables.push(table);

    let xs: Vec<f64> = checkpoints
        .iter()
        .zip(&in_window)
        .filter(|(_, &w)| w)
        .map(|(&c, _)| c as f64)
        .collect();
    let ys: Vec<f64> = tvs
        .iter()
        .zip(&in_window)
        .filter(|(_, &w)| w)
        .map(|(&tv, _)| tv.ln())
        .collect();
    let min_r2 = p.min_r2.unwrap_or(0.9);
    if xs.len() >= 3 {
        let fit = linear_fit(&xs, &ys)?;
        report.estimate("log_tv_slope_per_step", fit.slope, fit.slope_se);
        report.verdict(
            Verdict::new(format!("log TV decreases linearly in n (slope < 0, r² ≥ {min_r2})"), REFERENCE)
                .holds(fit.slope, Some(0.0), fit.slope < 0.0 && fit.r2 >= min_r2)
                .note(format!("r² = {:.4} over {} checkpoints", fit.r2, xs.len())),
        );
        let window: Vec<f64> = ys.iter().map(|y| y.exp()).collect();
        let monotone = window.windows(2).all(|w| w[1] <= w[0] + 3.0 * floor);
        report.verdict(
            Verdict::new("TV is non-increasing over the fitted window", REFERENCE)
                .holds(window[window.len() - 1], Some(window[0]), monotone)
                .note(format!("tolerance 3 × noise floor = {:.5}", 3.0 * floor)),
        );
    } else {
        report.verdict(
            Verdict::new("log TV decreases linearly in n", REFERENCE)
                .note(format!("only {} checkpoints above 5 × noise floor", xs.len()))
                .status(Status::Inconclusive),
        );
    }
    let last = *tvs.last().expect("at least one checkpoint");
    report.estimate("terminal_tv", last, floor);
    report.verdict(
        Verdict::new(format!("terminal TV ≤ {}", p.terminal_tv), "histogram noise scale")
            .holds(last, Some(p.terminal_tv), last <= p.terminal_tv)
            .note(format!("noise floor {floor:.5}")),
    );
    if p.write_samples {
        report.batches.push(("terminal".into(), SampleBatch::scalar(terminal)?));
        report.batches.push(("reference".into(), SampleBatch::scalar(reference_values)?));
    }
    Ok(())
}
