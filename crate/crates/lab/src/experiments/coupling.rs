//! Synchronous coupling of the diffusion with PRLMC on an isotropic quadratic.
//!
//! Tables: `coupling_probes.csv` (`probe, x_norm2, y_norm2, diff_norm2,
//! mean_theta2, se_theta2, contraction, remainder, bound`) for the one-step
//! inequality, and `coupling_trajectory.csv` (`step, time, mean_theta2,
//! se_theta2, mean_x_norm2, se_x_norm2, bound`) for `E|Θ_n|²` started from
//! a stationary diffusion and the configured PRLMC state.

use prlmc_core::metrics::{quadratic_prlmc_moment_oracle, MeanEstimate};
use prlmc_core::sampler::{coupled_step_ou, NoiseSource};
use prlmc_core::schedule::StepSchedule;
use prlmc_core::theory::{
    coupling_one_step_bound, decay_bound_trajectory, kappa, CouplingBoundInputs, DecayInputs,
};

use super::{constants, on_first_axis, par_map, tags};
use crate::config::ExperimentConfig;
use crate::error::{LabError, LabResult};
use crate::report::{ExperimentReport, Table, Verdict};

const ONE_STEP_REF: &str = "one-step contraction of the synchronous coupling";
const DECAY_REF: &str = "non-asymptotic W2 decay bound (u1, u2)";

fn default_probes(d: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    [
        (0.0, 0.0),
        (1.0, 1.0),
        (0.0, 1.0),
        (1.0, 0.0),
        (2.0, -1.0),
        (-3.0, 3.0),
        (5.0, 4.0),
        (0.5, -0.5),
        (10.0, 0.0),
        (-2.0, -1.0),
    ]
    .iter()
    .map(|&(a, b)| (on_first_axis(a, d), on_first_axis(b, d)))
    .collect()
}

pub(super) fn execute(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> LabResult<()> {
    let theta = cfg.theta()?;
    let k = cfg.k()?;
    let gamma = cfg.eta()?;
    let (m, l, l_tilde) = constants(cfg);
    let d = cfg.dimension();
    let p = &cfg.params;
    let kap = kappa(m, l)?;
    let epsilon = p.epsilon.unwrap_or(kap / 8.0);
    let inputs = CouplingBoundInputs {
        m,
        l,
        l_tilde,
        k,
        d,
        gamma,
        epsilon,
    };
    let probes = p.probes.clone().unwrap_or_else(|| default_probes(d));
    if probes.iter().any(|(x, y)| x.len() != d || y.len() != d) {
        return Err(LabError::config(format!("coupling probes must have dimension {d}")));
    }

    let mut table = Table::new(
        "coupling_probes",
        &[
            "probe", "x_norm2", "y_norm2", "diff_norm2", "mean_theta2", "se_theta2", "contraction", "remainder",
            "bound",
        ],
    );
    for (i, (x, y)) in probes.iter().enumerate() {
        let policy = cfg.sampler.rng.fork(tags::PROBE).fork(i as u64);
        let values: Vec<f64> = par_map(cfg.trials, |t| {
            let mut noise = policy.step_noise(t, 0);
            coupled_step_ou(x, y, theta, gamma, k, &mut noise)
                .map(|(a, b)| a.iter().zip(&b).map(|(u, v)| (u - v).powi(2)).sum::<f64>())
        })
        .into_iter()
        .collect::<Result<_, _>>()?;
        let est = MeanEstimate::from_iter(values)?;
        let diff: f64 = x.iter().zip(y).map(|(u, v)| (u - v).powi(2)).sum();
        let bound = coupling_one_step_bound(inputs, super::norm2(x), super::norm2(y), diff)?;
        table.push(vec![
            i.into(),
            super::norm2(x).into(),
            super::norm2(y).into(),
            diff.into(),
            est.mean.into(),
            est.se.into(),
            bound.contraction.into(),
            bound.remainder.into(),
            bound.total.into(),
        ]);
        report.estimate(format!("E|Θ1|² at probe {i}"), est.mean, est.se);
        report.verdict(
            Verdict::new(format!("one-step coupling inequality with ε = {epsilon:.6} at probe {i}"), ONE_STEP_REF)
                .at_most(est.mean, est.se, bound.total, p.z),
        );
    }
    report.tables.push(table);

    // Trajectory from X₀ ~ N(0, I/θ), Y₀ = configured initial state.
    let steps = cfg.steps;
    if steps > 0 {
        let checkpoints: Vec<u64> = if cfg.checkpoints.is_empty() {
            vec![steps]
        } else {
            cfg.checkpoints.iter().copied().filter(|&c| c >= 1 && c <= steps).collect()
        };
        let y0 = cfg.sampler.initial.clone();
        let start = cfg.sampler.rng.fork(tags::EXACT_TARGET);
        let policy = cfg.sampler.rng.fork(tags::TRAJECTORY);
        let sd = theta.powf(-0.5);
        let paths: Vec<Vec<(f64, f64)>> = par_map(cfg.trials, |t| -> LabResult<Vec<(f64, f64)>> {
            let mut x = vec![0.0; d];
            start.step_noise(t, 0).endpoint_gaussian(&mut x);
            x.iter_mut().for_each(|v| *v *= sd);
            let mut y = y0.clone();
            let mut out = Vec::with_capacity(checkpoints.len());
            let mut next = checkpoints.iter().peekable();
            for n in 0..steps {
                let mut noise = policy.step_noise(t, n);
                (x, y) = coupled_step_ou(&x, &y, theta, gamma, k, &mut noise)?;
                if next.peek().is_some_and(|&&c| c == n + 1) {
                    let diff = x.iter().zip(&y).map(|(u, v)| (u - v).powi(2)).sum();
                    out.push((diff, super::norm2(&x)));
                    next.next();
                }
            }
            Ok(out)
        })
        .into_iter()
        .collect::<LabResult<_>>()?;

        let schedule = StepSchedule::constant(gamma)?;
        let c_moment = match p.c_moment {
            Some(c) => c,
            None => {
                let (traj, fp) = quadratic_prlmc_moment_oracle(theta, gamma, k, d, super::norm2(&y0), steps as usize)?;
                traj.into_iter().fold(fp, f64::max)
            }
        };
        let decay = decay_bound_trajectory(
            &schedule,
            DecayInputs {
                m,
                l,
                l_tilde,
                k,
                d,
                c_moment,
            },
            &checkpoints,
        )?;
        let mut traj = Table::new(
            "coupling_trajectory",
            &["step", "time", "mean_theta2", "se_theta2", "mean_x_norm2", "se_x_norm2", "bound"],
        );
        for (j, &c) in checkpoints.iter().enumerate() {
            let theta2 = MeanEstimate::from_iter(paths.iter().map(|p| p[j].0))?;
            let xn = MeanEstimate::from_iter(paths.iter().map(|p| p[j].1))?;
            let bound = decay[j].w2_squared(super::norm2(&y0), d, m);
            traj.push(vec![
                c.into(),
                (c as f64 * gamma).into(),
                theta2.mean.into(),
                theta2.se.into(),
                xn.mean.into(),
                xn.se.into(),
                bound.into(),
            ]);
            report.verdict(
                Verdict::new(format!("E|Θ_n|² ≤ u1(|y0|² + d/m) + u2 at n = {c}"), DECAY_REF)
                    .at_most(theta2.mean, theta2.se, bound, p.z)
                    .note(format!("moment constant {c_moment:.6} from the exact recursion or config")),
            );
            if j + 1 == checkpoints.len() {
                report.estimate("terminal E|X_n|²", xn.mean, xn.se);
                report.verdict(
                    Verdict::new("diffusion leg stays stationary: E|X_n|² = d/θ", "stationary Gaussian moment")
                        .agrees(xn.mean, xn.se, d as f64 / theta, p.z),
                );
            }
        }
        report.tables.push(traj);
    }
    report.theory = serde_json::json!({ "kappa": kap, "epsilon": epsilon, "gamma": gamma });
    Ok(())
}
