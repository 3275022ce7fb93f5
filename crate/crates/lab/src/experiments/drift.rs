//! One-step drift of `V(x) = 1 + |x|²` under the PRLMC kernel.
//!
//! Table `drift.csv`: `radius, in_small_set, trials, mean_v, se_v, bound`.

use prlmc_core::metrics::MeanEstimate;
use prlmc_core::sampler::{prlmc_step, Workspace};
use prlmc_core::theory::{lyapunov_constants, TheoryBounds};

use super::{constants, on_first_axis, par_map, state_at, tags};
use crate::config::ExperimentConfig;
use crate::error::{LabError, LabResult};
use crate::report::{ExperimentReport, Table, Verdict};

const REFERENCE: &str = "one-step drift inequality for V = 1 + |x|²";

pub(super) fn execute(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> LabResult<()> {
    let k = cfg.k()?;
    let eta = cfg.eta()?;
    let (m, l, l_tilde) = constants(cfg);
    let d = cfg.dimension();
    let p = &cfg.params;
    if p.probe_radii.is_empty() || p.probe_radii.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(LabError::config("probe_radii must be nonempty and nonnegative"));
    }
    let lya = lyapunov_constants(m, l, k, d, eta);
    report.theory = serde_json::json!({
        "lyapunov": lya,
        "bounds": TheoryBounds::evaluate(m, l, l_tilde, k, d, eta)?,
    });
    if lya.lambda >= 1.0 {
        report.warnings.push(format!("λ(η) = {} ≥ 1: the drift inequality gives no contraction", lya.lambda));
    }

    let potential = &cfg.sampler.potential;
    let mode = cfg.sampler.midpoint_noise_mode;
    let mut table = Table::new("drift", &["radius", "in_small_set", "trials", "mean_v", "se_v", "bound"]);
    for (i, &r) in p.probe_radii.iter().enumerate() {
        let x = on_first_axis(r, d);
        let v0 = 1.0 + r * r;
        let inside = r <= lya.radius;
        let bound = lya.lambda * v0 + if inside { lya.b } else { 0.0 };
        let policy = cfg.sampler.rng.fork(tags::PROBE).fork(i as u64);
        let values = par_map(cfg.trials, |t| {
            let mut state = state_at(&x);
            let mut ws = Workspace::new(d);
            let mut noise = policy.step_noise(t, 0);
            prlmc_step(&mut state, potential, eta, k, mode, &mut noise, &mut ws);
            1.0 + super::norm2(&state.position)
        });
        let est = MeanEstimate::from_iter(values)?;
        table.push(vec![
            r.into(),
            inside.into(),
            cfg.trials.into(),
            est.mean.into(),
            est.se.into(),
            bound.into(),
        ]);
        report.estimate(format!("E[V(X1)] at |x| = {r}"), est.mean, est.se);
        report.verdict(
            Verdict::new(format!("E[V(X1) | X0 = x] ≤ λV(x) + b·1_D(x) at |x| = {r}"), REFERENCE)
                .at_most(est.mean, est.se, bound, p.z)
                .note(if inside { "inside the small set" } else { "outside the small set" }),
        );
    }
    report.tables.push(table);
    Ok(())
}
