//! Exact first and second moments of PRLMC on `U(x) = θ|x|²/2`.
//!
//! With `∇U(x) = θx` one step reads `X′ = A·X + noise`, where
//! `A = 1 − ηθ + (η²θ²/K) Σ_i H_i·i` is a scalar shared by all coordinates
//! and the noise is centred and independent of `X`. Hence
//! `E|X′|² = E[A²]·E|X|² + v` and `E[X′] = E[A]·E[X]`.
//!
//! The recursion assumes independent midpoint Gaussians per index
//! ([`MidpointNoiseMode::IndependentPerIndex`](crate::sampler::MidpointNoiseMode)).

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::schedule::StepSchedule;

/// One-step moment map of PRLMC on an isotropic quadratic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentRecursion {
    pub theta: f64,
    pub eta: f64,
    pub k: usize,
    pub d: usize,
    /// `E[A]`
    pub mean_factor: f64,
    /// `Var(A)`
    pub variance_factor: f64,
    /// `E[A²]`
    pub second_factor: f64,
    /// Expected squared norm of the injected noise, `v`.
    pub offset: f64,
}

fn step_map(theta: f64, eta: f64, k: usize, d: usize) -> MomentRecursion {
    let kf = k as f64;
    let h = eta * eta * theta * theta;
    // Σ_{i<K} i and Σ_{i<K} i²
    let s1 = kf * (kf - 1.0) / 2.0;
    let s2 = (kf - 1.0) * kf * (2.0 * kf - 1.0) / 6.0;
    let p = 1.0 / kf;
    let mean_factor = 1.0 - eta * theta + h / kf * p * s1;
    let variance_factor = (h / kf).powi(2) * p * (1.0 - p) * s2;
    let second_factor = mean_factor * mean_factor + variance_factor;
    let offset = h * (2.0 * eta / (kf * kf)) * s1 * d as f64 + 2.0 * eta * d as f64;
    MomentRecursion {
        theta,
        eta,
        k,
        d,
        mean_factor,
        variance_factor,
        second_factor,
        offset,
    }
}

fn check_inputs(theta: f64, k: usize, d: usize) -> Result<()> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(invalid(format!("theta must be positive, got {theta}")));
    }
    if k == 0 {
        return Err(invalid("K must be at least 1"));
    }
    if d == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    Ok(())
}

impl MomentRecursion {
    /// Fails with [`Error::NonContractive`] when `E[A²] ≥ 1`.
    pub fn new(theta: f64, eta: f64, k: usize, d: usize) -> Result<Self> {
        check_inputs(theta, k, d)?;
        if !(eta.is_finite() && eta > 0.0) {
            return Err(invalid(format!("step must be positive, got {eta}")));
        }
        let r = step_map(theta, eta, k, d);
        if r.second_factor >= 1.0 {
            return Err(Error::NonContractive(format!(
                "E[A²] = {} ≥ 1 at η = {eta}, θ = {theta}, K = {k}",
                r.second_factor
            )));
        }
        Ok(r)
    }

    /// `E|X′|²` given `E|X|²`.
    pub fn step(&self, second_moment: f64) -> f64 {
        self.second_factor * second_moment + self.offset
    }

    /// `v / (1 − E[A²])`
    pub fn fixed_point(&self) -> f64 {
        self.offset / (1.0 - self.second_factor)
    }

    /// `E|X̃_k|²` for `k = 0..=n_steps`.
    pub fn trajectory(&self, x0_norm2: f64, n_steps: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n_steps + 1);
        let mut m = x0_norm2;
        out.push(m);
        for _ in 0..n_steps {
            m = self.step(m);
            out.push(m);
        }
        out
    }
}

/// Exact `E|X̃_k|²` for `k = 0..=n_steps` and the stationary value.
pub fn quadratic_prlmc_moment_oracle(
    theta: f64,
    eta: f64,
    k: usize,
    d: usize,
    x0_norm2: f64,
    n_steps: usize,
) -> Result<(Vec<f64>, f64)> {
    if !(x0_norm2.is_finite() && x0_norm2 >= 0.0) {
        return Err(invalid("initial squared norm must be finite and nonnegative"));
    }
    let r = MomentRecursion::new(theta, eta, k, d)?;
    Ok((r.trajectory(x0_norm2, n_steps), r.fixed_point()))
}

/// Stationary `E|X|²` on `U(x) = ½ Σ_j λ_j x_j²`, summed over eigendirections.
pub fn anisotropic_fixed_point(spectrum: &[f64], eta: f64, k: usize) -> Result<f64> {
    if spectrum.is_empty() {
        return Err(invalid("empty spectrum"));
    }
    spectrum
        .iter()
        .map(|&l| MomentRecursion::new(l, eta, k, 1).map(|r| r.fixed_point()))
        .sum()
}

/// Moments of the decreasing-step chain after `n` steps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentPoint {
    pub n: u64,
    pub t: f64,
    /// `E[X̃_n]`
    pub mean: Vec<f64>,
    /// `E|X̃_n|²`
    pub second_moment: f64,
}

impl MomentPoint {
    /// `E|X̃_n − E X̃_n|²`
    pub fn total_variance(&self) -> f64 {
        self.second_moment - self.mean.iter().map(|m| m * m).sum::<f64>()
    }

    /// `W₂` lower bound against `N(0, I/θ)` from the first two moments:
    /// `|μ|² + d·(√(tr Σ/d) − 1/√θ)²` is a lower bound whenever the
    /// covariance is isotropic, which holds here by rotational symmetry
    /// of the noise.
    pub fn gelbrich_to_gaussian(&self, theta: f64) -> f64 {
        let d = self.mean.len() as f64;
        let mu2: f64 = self.mean.iter().map(|m| m * m).sum();
        let sigma = (self.total_variance().max(0.0) / d).sqrt();
        (mu2 + d * (sigma - theta.powf(-0.5)).powi(2)).sqrt()
    }
}

/// Exact moments of PRLMC with steps `γ_1, γ_2, …` from `x0`, reported at
/// each requested step count (ascending).
pub fn decreasing_moment_trajectory(
    theta: f64,
    schedule: &StepSchedule,
    k: usize,
    x0: &[f64],
    checkpoints: &[u64],
) -> Result<Vec<MomentPoint>> {
    check_inputs(theta, k, x0.len())?;
    schedule.check()?;
    if checkpoints.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("checkpoints must be ascending"));
    }
    let d = x0.len();
    let mut second: f64 = x0.iter().map(|v| v * v).sum();
    let mut mean_scale = 1.0;
    let mut t = 0.0;
    let mut n = 0u64;
    let mut out = Vec::with_capacity(checkpoints.len());
    for &target in checkpoints {
        while n < target {
            n += 1;
            let gamma = schedule.gamma_unchecked(n);
            let r = step_map(theta, gamma, k, d);
            second = r.step(second);
            mean_scale *= r.mean_factor;
            t += gamma;
        }
        if !second.is_finite() {
            return Err(Error::Numerics(format!("second moment overflowed by step {n}")));
        }
        out.push(MomentPoint {
            n,
            t,
            mean: x0.iter().map(|v| v * mean_scale).collect(),
            second_moment: second,
        });
    }
    Ok(out)
}
