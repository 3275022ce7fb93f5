//! The continuous Langevin diffusion: exact Ornstein–Uhlenbeck transitions,
//! a fine Euler reference for general potentials, and the synchronous
//! coupling of the diffusion with one PRLMC step.

use super::kernels::{prlmc_step, MidpointNoiseMode, Workspace};
use super::noise::NoiseSource;
use super::ChainState;
use crate::error::{invalid, Error, Result};
use crate::potential::PotentialSpec;

/// Number of Euler sub-steps used by the reference diffusion.
pub const REFERENCE_SUBSTEPS: usize = 256;

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive, got {v}")))
    }
}

/// Exact sample of `dX = −θX dt + √2 dB` at time `t` from `x`:
/// `e^{−θt}x + √((1 − e^{−2θt})/θ)·ξ`, with `ξ` the endpoint Gaussian.
pub fn ou_exact_step<N: NoiseSource + ?Sized>(
    x: &[f64],
    theta: f64,
    t: f64,
    noise: &mut N,
) -> Result<Vec<f64>> {
    check_positive("theta", theta)?;
    check_positive("t", t)?;
    let decay = (-theta * t).exp();
    let sd = (-(-2.0 * theta * t).exp_m1() / theta).sqrt();
    let mut xi = vec![0.0; x.len()];
    noise.endpoint_gaussian(&mut xi);
    Ok(x.iter().zip(&xi).map(|(x, z)| decay * x + sd * z).collect())
}

/// Joint law of `(S, ΔB)` per coordinate, with `S = ∫_0^γ e^{−θ(γ−s)} dB_s`
/// and `ΔB = B_γ − B_0`: `S = (cov/γ)ΔB + √residual·Z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuBridge {
    pub decay: f64,
    pub cov: f64,
    pub var: f64,
    pub residual: f64,
}

impl OuBridge {
    pub fn new(theta: f64, gamma: f64) -> Result<Self> {
        check_positive("theta", theta)?;
        check_positive("gamma", gamma)?;
        let a = theta * gamma;
        let cov = -(-a).exp_m1() / theta;
        let var = -(-2.0 * a).exp_m1() / (2.0 * theta);
        let residual = var - cov * cov / gamma;
        if !residual.is_finite() || residual < -1e-12 * var {
            return Err(Error::Numerics(format!(
                "conditional covariance is not positive semidefinite (residual {residual:e})"
            )));
        }
        Ok(Self {
            decay: (-a).exp(),
            cov,
            var,
            residual: residual.max(0.0),
        })
    }
}

/// Synchronous coupling over one step of length `gamma`.
///
/// `X` follows the Ornstein–Uhlenbeck diffusion for `U = (θ/2)|x|²` exactly,
/// conditionally on the Brownian increment `ΔB = √γ·ξ`; `Y` takes one PRLMC
/// step driven by the same `ξ` and a shared midpoint driver independent of it.
pub fn coupled_step_ou<N: NoiseSource + ?Sized>(
    x: &[f64],
    y: &[f64],
    theta: f64,
    gamma: f64,
    k: usize,
    noise: &mut N,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if k == 0 {
        return Err(invalid("K must be at least 1"));
    }
    let bridge = OuBridge::new(theta, gamma)?;
    let d = x.len();
    let potential = PotentialSpec::isotropic(theta, d)?;

    let mut ws = Workspace::new(d);
    let mut yy = ChainState::new(y.to_vec());
    prlmc_step(
        &mut yy,
        &potential,
        gamma,
        k,
        MidpointNoiseMode::SharedDriver,
        noise,
        &mut ws,
    );

    let mut xi = vec![0.0; d];
    let mut z = vec![0.0; d];
    noise.endpoint_gaussian(&mut xi);
    noise.residual_gaussian(&mut z);
    let sqrt_gamma = gamma.sqrt();
    let slope = bridge.cov / gamma;
    let spread = bridge.residual.sqrt();
    let xx = x
        .iter()
        .zip(&xi)
        .zip(&z)
        .map(|((x, xi), z)| {
            let s = slope * sqrt_gamma * xi + spread * z;
            bridge.decay * x + std::f64::consts::SQRT_2 * s
        })
        .collect();
    Ok((xx, yy.position))
}

fn euler_path(
    x: &mut [f64],
    potential: &PotentialSpec,
    h: f64,
    increments: &[f64],
    grad: &mut [f64],
) {
    let d = x.len();
    for db in increments.chunks_exact(d) {
        potential.gradient_into(x, grad);
        for ((xi, g), b) in x.iter_mut().zip(grad.iter()).zip(db) {
            *xi += -h * g + std::f64::consts::SQRT_2 * b;
        }
    }
}

/// Approximate diffusion sample at time `t` by Euler sub-stepping with step
/// `t / substeps`. An oracle-grade approximation, not an exact transition.
pub fn langevin_reference_step<N: NoiseSource + ?Sized>(
    x: &[f64],
    potential: &PotentialSpec,
    t: f64,
    substeps: usize,
    noise: &mut N,
) -> Result<Vec<f64>> {
    check_positive("t", t)?;
    if substeps == 0 {
        return Err(invalid("substeps must be at least 1"));
    }
    let d = potential.dimension();
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: x.len(),
        });
    }
    let h = t / substeps as f64;
    let mut inc = vec![0.0; substeps * d];
    noise.residual_gaussian(&mut inc);
    let sh = h.sqrt();
    inc.iter_mut().for_each(|v| *v *= sh);
    let mut out = x.to_vec();
    let mut grad = vec![0.0; d];
    euler_path(&mut out, potential, h, &inc, &mut grad);
    Ok(out)
}

/// Synchronous coupling for a general potential: the diffusion leg uses the
/// Euler reference whose sub-step increments are conditioned to sum to the
/// PRLMC leg's `ΔB = √γ·ξ` (a discrete Brownian bridge).
pub fn coupled_step_euler<N: NoiseSource + ?Sized>(
    x: &[f64],
    y: &[f64],
    potential: &PotentialSpec,
    gamma: f64,
    k: usize,
    substeps: usize,
    noise: &mut N,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_positive("gamma", gamma)?;
    let d = potential.dimension();
    for v in [x, y] {
        if v.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: v.len(),
            });
        }
    }
    if k == 0 || substeps == 0 {
        return Err(invalid("K and substeps must be at least 1"));
    }
    let mut ws = Workspace::new(d);
    let mut yy = ChainState::new(y.to_vec());
    prlmc_step(
        &mut yy,
        potential,
        gamma,
        k,
        MidpointNoiseMode::SharedDriver,
        noise,
        &mut ws,
    );

    let mut xi = vec![0.0; d];
    noise.endpoint_gaussian(&mut xi);
    let mut inc = vec![0.0; substeps * d];
    noise.residual_gaussian(&mut inc);
    let n = substeps as f64;
    let h = gamma / n;
    let sh = h.sqrt();
    for j in 0..d {
        let mean = inc.iter().skip(j).step_by(d).sum::<f64>() / n;
        let total = gamma.sqrt() * xi[j];
        for v in inc.iter_mut().skip(j).step_by(d) {
            *v = total / n + sh * (*v - mean);
        }
    }
    let mut xx = x.to_vec();
    let mut grad = vec![0.0; d];
    euler_path(&mut xx, potential, h, &inc, &mut grad);
    Ok((xx, yy.position))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::noise::{RngPolicy, ScriptedNoise};

    #[test]
    fn ou_without_noise_decays() {
        let out = ou_exact_step(&[2.0, -1.0], 1.5, 0.4, &mut ScriptedNoise::zero()).unwrap();
        let e = (-0.6f64).exp();
        assert_eq!(out, vec![2.0 * e, -e]);
    }

    #[test]
    fn ou_rejects_bad_parameters() {
        let mut n = ScriptedNoise::zero();
        assert!(ou_exact_step(&[1.0], 0.0, 1.0, &mut n).is_err());
        assert!(ou_exact_step(&[1.0], 1.0, 0.0, &mut n).is_err());
    }

    #[test]
    fn bridge_moments() {
        let b = OuBridge::new(1.0, 0.1).unwrap();
        assert!((b.cov - (1.0 - (-0.1f64).exp())).abs() < 1e-15);
        assert!((b.var - (1.0 - (-0.2f64).exp()) / 2.0).abs() < 1e-15);
        // leading order θ²γ³/12
        let b = OuBridge::new(1.0, 0.01).unwrap();
        assert!((b.residual / (1e-6 / 12.0) - 1.0).abs() < 0.02);
        assert!(b.residual >= 0.0);
        assert!(OuBridge::new(1.0, -0.1).is_err());
    }

    #[test]
    fn coupling_noise_free_matches_both_legs() {
        let (x, y) =
            coupled_step_ou(&[1.0], &[2.0], 1.0, 0.1, 2, &mut ScriptedNoise::zero()).unwrap();
        assert!((x[0] - (-0.1f64).exp()).abs() < 1e-15);
        assert!((y[0] - 1.8).abs() < 1e-15);
        assert!(coupled_step_ou(&[1.0], &[2.0, 0.0], 1.0, 0.1, 2, &mut ScriptedNoise::zero()).is_err());
    }

    #[test]
    fn identical_start_tiny_step_stays_together() {
        let policy = RngPolicy::new(3);
        let mut worst: f64 = 0.0;
        for step in 0..1000 {
            let (x, y) =
                coupled_step_ou(&[0.7], &[0.7], 1.0, 1e-6, 4, &mut policy.step_noise(0, step)).unwrap();
            worst = worst.max((x[0] - y[0]).abs());
        }
        assert!(worst < 1e-7, "{worst}");
    }

    #[test]
    fn euler_coupling_diffusion_leg_has_ou_moments() {
        let p = PotentialSpec::isotropic(1.0, 1).unwrap();
        let policy = RngPolicy::new(8);
        let trials = 20_000u64;
        let mut xs = Vec::with_capacity(trials as usize);
        for t in 0..trials {
            let (x, y) = coupled_step_euler(&[1.0], &[1.0], &p, 0.1, 2, REFERENCE_SUBSTEPS, &mut policy.step_noise(t, 0)).unwrap();
            let (_, yo) = coupled_step_ou(&[1.0], &[1.0], 1.0, 0.1, 2, &mut policy.step_noise(t, 0)).unwrap();
            assert_eq!(y, yo);
            xs.push(x[0]);
        }
        let n = trials as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let exact_var = 1.0 - (-0.2f64).exp();
        assert!((mean - (-0.1f64).exp()).abs() < 4.0 * (exact_var / n).sqrt());
        assert!((var / exact_var - 1.0).abs() < 4.0 * (2.0 / n).sqrt());
    }
}
