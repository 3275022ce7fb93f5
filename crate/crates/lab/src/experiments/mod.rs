mod bias;
mod coupling;
mod decreasing;
mod drift;
mod midpoint;
mod run;
mod strong;
mod tv;

use prlmc_core::metrics::{w2_1d, MeanEstimate, SampleBatch};
use prlmc_core::potential::PotentialKind;
use prlmc_core::sampler::{Chain, ChainState, NoiseSource, RngPolicy, SamplerConfig};
use prlmc_core::schedule::StepSchedule;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{LabError, LabResult};
use crate::report::ExperimentReport;

pub(crate) fn execute(experiment: Experiment, cfg: &ExperimentConfig) -> LabResult<ExperimentReport> {
    let mut report = ExperimentReport::new(experiment, cfg.master_seed, serde_json::to_value(cfg)?);
    match experiment {
        Experiment::Run => run::execute(cfg, &mut report)?,
        Experiment::BiasSweep => bias::execute(cfg, &mut report)?,
        Experiment::DriftCheck => drift::execute(cfg, &mut report)?,
        Experiment::CouplingCheck => coupling::execute(cfg, &mut report)?,
        Experiment::TvDecay => tv::execute(cfg, &mut report)?,
        Experiment::DecreasingStep => decreasing::execute(cfg, &mut report)?,
        Experiment::MidpointLaw => midpoint::execute(cfg, &mut report)?,
        Experiment::StrongError => strong::execute(cfg, &mut report)?,
    }
    Ok(report)
}

/// Stream families, kept apart with [`RngPolicy::fork`].
mod tags {
    pub const REFERENCE_A: u64 = 1;
    pub const REFERENCE_B: u64 = 2;
    pub const EXACT_TARGET: u64 = 3;
    pub const PROBE: u64 = 4;
    pub const TRAJECTORY: u64 = 5;
    pub const GRID: u64 = 6;
}

/// `(m, L, L̃)` of the configured potential.
fn constants(cfg: &ExperimentConfig) -> (f64, f64, f64) {
    let p = &cfg.sampler.potential;
    (p.m(), p.l(), p.l_tilde())
}

/// Per-coordinate variances of the target when it is Gaussian.
fn gaussian_variances(cfg: &ExperimentConfig) -> LabResult<Vec<f64>> {
    let p = &cfg.sampler.potential;
    match p.kind() {
        PotentialKind::IsotropicQuadratic { theta } => Ok(vec![1.0 / theta; p.dimension()]),
        PotentialKind::AnisotropicQuadratic { spectrum } => Ok(spectrum.iter().map(|l| 1.0 / l).collect()),
        PotentialKind::QuadraticLogCosh { .. } => Err(LabError::config(
            "this experiment needs a quadratic potential with a Gaussian target",
        )),
    }
}

fn config_with_schedule(cfg: &ExperimentConfig, schedule: StepSchedule, policy: RngPolicy) -> SamplerConfig {
    let mut s = cfg.sampler.clone();
    s.schedule = schedule;
    s.rng = policy;
    s
}

/// Order-preserving parallel map over `0..n`.
fn par_map<T: Send>(n: u64, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    (0..n).into_par_iter().map(f).collect()
}

/// Stratified sample of `N(0, var)`: the quantiles at `(i + ½)/n`.
fn gaussian_quantiles(n: usize, var: f64) -> LabResult<SampleBatch> {
    let normal = Normal::new(0.0, var.sqrt()).map_err(|e| LabError::config(e.to_string()))?;
    let values = (0..n)
        .map(|i| normal.inverse_cdf((i as f64 + 0.5) / n as f64))
        .collect();
    Ok(SampleBatch::scalar(values)?)
}

/// Exact draws from `N(0, diag(variances))`.
fn gaussian_batch(policy: &RngPolicy, n: u64, variances: &[f64]) -> LabResult<SampleBatch> {
    let d = variances.len();
    let rows = par_map(n, |i| {
        let mut z = vec![0.0; d];
        policy.step_noise(i, 0).endpoint_gaussian(&mut z);
        for (z, v) in z.iter_mut().zip(variances) {
            *z *= v.sqrt();
        }
        z
    });
    Ok(SampleBatch::new(d, rows.concat())?)
}

/// `√(Σ_j W₂²(coordinate j, N(0, v_j)))`, the sum over coordinates of the 1-D
/// distances to the stratified Gaussian reference. On a product target this
/// lower-bounds the joint distance and equals it for product samples.
fn w2_coordinatewise(batch: &SampleBatch, variances: &[f64]) -> LabResult<f64> {
    let mut total = 0.0;
    for (j, &v) in variances.iter().enumerate() {
        let column = batch.column(j)?;
        let reference = gaussian_quantiles(column.len(), v)?;
        total += w2_1d(&column, &reference)?.powi(2);
    }
    Ok(total.sqrt())
}

/// Estimate over the whole batch with a batch-means standard error from
/// `groups` contiguous groups.
fn grouped<F>(batch: &SampleBatch, groups: usize, estimator: F) -> LabResult<(f64, f64)>
where
    F: Fn(&SampleBatch) -> LabResult<f64>,
{
    let full = estimator(batch)?;
    let n = batch.len();
    let size = n / groups;
    if size < 2 {
        return Ok((full, f64::NAN));
    }
    let d = batch.dimension();
    let mut parts = Vec::with_capacity(groups);
    for g in 0..groups {
        let slice = batch.values()[g * size * d..(g + 1) * size * d].to_vec();
        parts.push(estimator(&SampleBatch::new(d, slice)?)?);
    }
    let est = MeanEstimate::from_iter(parts)?;
    // The full-batch estimate varies like the mean of the group estimates.
    Ok((full, est.se))
}

/// `count` stationary draws per chain from `chains` independent chains, each
/// burnt in for `burn_in` steps and thinned every `thin` steps.
fn stationary_draws(
    sampler: &SamplerConfig,
    chains: u64,
    per_chain: u64,
    burn_in: u64,
    thin: u64,
) -> LabResult<Vec<Vec<Vec<f64>>>> {
    par_map(chains, |c| -> LabResult<Vec<Vec<f64>>> {
        let mut chain = Chain::new(sampler, c)?;
        chain.advance(burn_in)?;
        let mut out = Vec::with_capacity(per_chain as usize);
        for _ in 0..per_chain {
            chain.advance(thin)?;
            out.push(chain.position().to_vec());
        }
        Ok(out)
    })
    .into_iter()
    .collect()
}

/// Steps for roughly `relaxations` relaxation times `1/(mη)`, at least one.
fn relaxation_steps(m: f64, eta: f64, relaxations: f64) -> u64 {
    ((relaxations / (m * eta)).ceil() as u64).max(1)
}

fn state_at(x: &[f64]) -> ChainState {
    ChainState::new(x.to_vec())
}

/// Point `r·e₁` in dimension `d`.
fn on_first_axis(r: f64, d: usize) -> Vec<f64> {
    let mut x = vec![0.0; d];
    x[0] = r;
    x
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}
