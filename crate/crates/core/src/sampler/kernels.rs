//! One-step transition kernels.

use serde::{Deserialize, Serialize};

use super::noise::NoiseSource;
use super::ChainState;
use crate::potential::PotentialSpec;

/// How the Gaussians of the PRLMC midpoints are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MidpointNoiseMode {
    /// Fresh `ζ_i` for every candidate index, independent of the endpoint noise.
    #[default]
    IndependentPerIndex,
    /// One Gaussian `W` per step drives all midpoints: `ζ_i = W`, i.e. the
    /// midpoint noise `√(2i/K)·(B′_{t+η} − B′_t)` of a single Brownian motion.
    SharedDriver,
}

/// Per-step bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepStats {
    pub gradient_evals: u32,
    /// Number of `H_{k,i} = 1`, including `i = 0`.
    pub triggered: u32,
}

/// Scratch buffers reused across steps.
#[derive(Debug, Clone)]
pub struct Workspace {
    grad: Vec<f64>,
    probe: Vec<f64>,
    probe_grad: Vec<f64>,
    correction: Vec<f64>,
    noise: Vec<f64>,
    shared: Vec<f64>,
}

impl Workspace {
    pub fn new(d: usize) -> Self {
        Self {
            grad: vec![0.0; d],
            probe: vec![0.0; d],
            probe_grad: vec![0.0; d],
            correction: vec![0.0; d],
            noise: vec![0.0; d],
            shared: vec![0.0; d],
        }
    }

    fn ensure(&mut self, d: usize) {
        if self.grad.len() != d {
            *self = Self::new(d);
        }
    }
}

/// `x ← x − η·g (+ η·c) + √(2η)·ξ`
#[inline]
fn langevin_update(x: &mut [f64], grad: &[f64], correction: Option<&[f64]>, eta: f64, xi: &[f64]) {
    let scale = (2.0 * eta).sqrt();
    match correction {
        None => {
            for ((xi_, g), n) in x.iter_mut().zip(grad).zip(xi) {
                *xi_ = *xi_ - eta * g + scale * n;
            }
        }
        Some(c) => {
            for (((xi_, g), c), n) in x.iter_mut().zip(grad).zip(c).zip(xi) {
                *xi_ = *xi_ - eta * g + eta * c + scale * n;
            }
        }
    }
}

fn advance(state: &mut ChainState, eta: f64) {
    state.step_index += 1;
    state.elapsed_time += eta;
}

/// Unadjusted Langevin step: `x′ = x − η∇U(x) + √(2η)ξ`.
pub fn ula_step<N: NoiseSource + ?Sized>(
    state: &mut ChainState,
    potential: &PotentialSpec,
    eta: f64,
    noise: &mut N,
    ws: &mut Workspace,
) -> StepStats {
    ws.ensure(state.position.len());
    potential.gradient_into(&state.position, &mut ws.grad);
    noise.endpoint_gaussian(&mut ws.noise);
    langevin_update(&mut state.position, &ws.grad, None, eta, &ws.noise);
    advance(state, eta);
    StepStats {
        gradient_evals: 1,
        triggered: 0,
    }
}

/// Randomized midpoint step with `u ~ U[0,1]`:
/// `x_mid = x − uη∇U(x) + √(2uη)ξ′`, `x′ = x − η∇U(x_mid) + √(2η)ξ`.
pub fn rlmc_step<N: NoiseSource + ?Sized>(
    state: &mut ChainState,
    potential: &PotentialSpec,
    eta: f64,
    noise: &mut N,
    ws: &mut Workspace,
) -> StepStats {
    ws.ensure(state.position.len());
    let u = noise.midpoint_time();
    potential.gradient_into(&state.position, &mut ws.grad);
    noise.midpoint_gaussian(0, &mut ws.shared);
    let s = (2.0 * u * eta).sqrt();
    for (((p, x), g), z) in ws
        .probe
        .iter_mut()
        .zip(&state.position)
        .zip(&ws.grad)
        .zip(&ws.shared)
    {
        *p = x - u * eta * g + s * z;
    }
    potential.gradient_into(&ws.probe, &mut ws.probe_grad);
    noise.endpoint_gaussian(&mut ws.noise);
    langevin_update(&mut state.position, &ws.probe_grad, None, eta, &ws.noise);
    advance(state, eta);
    StepStats {
        gradient_evals: 2,
        triggered: 0,
    }
}

/// Poisson randomized midpoint step with `K` candidate midpoints.
///
/// Each candidate `i` is activated by `H_i ~ Bernoulli(1/K)`. Activated
/// candidates with `i ≥ 1` evaluate the gradient at
/// `X̂_i = x − (iη/K)∇U(x) + √(2iη/K)ζ_i` and contribute
/// `η(∇U(x) − ∇U(X̂_i))` to the update. Candidate 0 sits at `x` itself and
/// never contributes, so its gradient is not evaluated.
pub fn prlmc_step<N: NoiseSource + ?Sized>(
    state: &mut ChainState,
    potential: &PotentialSpec,
    eta: f64,
    k: usize,
    mode: MidpointNoiseMode,
    noise: &mut N,
    ws: &mut Workspace,
) -> StepStats {
    debug_assert!(k >= 1);
    ws.ensure(state.position.len());
    potential.gradient_into(&state.position, &mut ws.grad);

    let p = 1.0 / k as f64;
    let mut stats = StepStats {
        gradient_evals: 1,
        triggered: 0,
    };
    let mut corrected = false;
    let mut shared_drawn = false;
    for i in 0..k {
        if !noise.bernoulli(i, p) {
            continue;
        }
        stats.triggered += 1;
        if i == 0 {
            continue;
        }
        let frac = i as f64 / k as f64;
        let s = (2.0 * frac * eta).sqrt();
        match mode {
            MidpointNoiseMode::IndependentPerIndex => noise.midpoint_gaussian(i, &mut ws.shared),
            MidpointNoiseMode::SharedDriver => {
                if !shared_drawn {
                    noise.midpoint_gaussian(0, &mut ws.shared);
                    shared_drawn = true;
                }
            }
        }
        for (((pr, x), g), z) in ws
            .probe
            .iter_mut()
            .zip(&state.position)
            .zip(&ws.grad)
            .zip(&ws.shared)
        {
            *pr = x - frac * eta * g + s * z;
        }
        potential.gradient_into(&ws.probe, &mut ws.probe_grad);
        stats.gradient_evals += 1;
        if !corrected {
            ws.correction.fill(0.0);
            corrected = true;
        }
        for ((c, g), pg) in ws.correction.iter_mut().zip(&ws.grad).zip(&ws.probe_grad) {
            *c += g - pg;
        }
    }

    noise.endpoint_gaussian(&mut ws.noise);
    let correction = corrected.then_some(ws.correction.as_slice());
    langevin_update(&mut state.position, &ws.grad, correction, eta, &ws.noise);
    advance(state, eta);
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::noise::{RngPolicy, ScriptedNoise, SuppressMidpoints};

    fn iso(d: usize) -> PotentialSpec {
        PotentialSpec::isotropic(1.0, d).unwrap()
    }

    #[test]
    fn ula_deterministic_part() {
        let mut s = ChainState::new(vec![1.0]);
        let mut ws = Workspace::new(1);
        let stats = ula_step(&mut s, &iso(1), 0.1, &mut ScriptedNoise::zero(), &mut ws);
        assert!((s.position[0] - 0.9).abs() < 1e-15);
        assert_eq!(s.step_index, 1);
        assert!((s.elapsed_time - 0.1).abs() < 1e-15);
        assert_eq!(stats.gradient_evals, 1);
    }

    #[test]
    fn origin_is_a_fixed_point_without_noise() {
        let potentials = [
            iso(2),
            PotentialSpec::anisotropic(vec![1.0, 3.0]).unwrap(),
            PotentialSpec::quadratic_log_cosh(1.0, 2.0, 2).unwrap(),
        ];
        for p in &potentials {
            let mut ws = Workspace::new(2);
            let mut noise = ScriptedNoise {
                activations: vec![true; 4],
                midpoint_time: 0.7,
                ..ScriptedNoise::zero()
            };
            let mut s = ChainState::new(vec![0.0, 0.0]);
            ula_step(&mut s, p, 0.1, &mut noise, &mut ws);
            rlmc_step(&mut s, p, 0.1, &mut noise, &mut ws);
            prlmc_step(&mut s, p, 0.1, 4, MidpointNoiseMode::IndependentPerIndex, &mut noise, &mut ws);
            prlmc_step(&mut s, p, 0.1, 4, MidpointNoiseMode::SharedDriver, &mut noise, &mut ws);
            assert_eq!(s.position, vec![0.0, 0.0]);
        }
    }

    #[test]
    fn rlmc_hand_evaluation() {
        let mut s = ChainState::new(vec![1.0]);
        let mut ws = Workspace::new(1);
        let mut noise = ScriptedNoise {
            midpoint_time: 0.5,
            ..ScriptedNoise::zero()
        };
        let stats = rlmc_step(&mut s, &iso(1), 0.1, &mut noise, &mut ws);
        // midpoint 1 − 0.05 = 0.95; x′ = 1 − 0.1·0.95
        assert!((s.position[0] - 0.905).abs() < 1e-15);
        assert_eq!(stats.gradient_evals, 2);
    }

    #[test]
    fn rlmc_with_zero_midpoint_is_ula() {
        let p = PotentialSpec::quadratic_log_cosh(1.0, 0.5, 3).unwrap();
        let x0 = vec![0.3, -1.2, 2.5];
        let mut noise = ScriptedNoise {
            endpoint: vec![0.4, -0.2, 1.1],
            midpoint: vec![0.0; 3],
            midpoint_time: 0.0,
            ..ScriptedNoise::zero()
        };
        let mut ws = Workspace::new(3);
        let mut a = ChainState::new(x0.clone());
        let mut b = ChainState::new(x0);
        rlmc_step(&mut a, &p, 0.05, &mut noise, &mut ws);
        ula_step(&mut b, &p, 0.05, &mut noise, &mut ws);
        assert_eq!(a.position, b.position);
    }

    #[test]
    fn prlmc_without_activations_is_ula_bitwise() {
        let p = PotentialSpec::quadratic_log_cosh(0.8, 0.6, 4).unwrap();
        let policy = RngPolicy::new(2024);
        let mut ws = Workspace::new(4);
        let mut a = ChainState::new(vec![1.5, -0.5, 0.25, -3.0]);
        let mut b = a.clone();
        for step in 0..1000 {
            let mut na = SuppressMidpoints(policy.step_noise(0, step));
            let mut nb = policy.step_noise(0, step);
            let st = prlmc_step(&mut a, &p, 0.07, 8, MidpointNoiseMode::IndependentPerIndex, &mut na, &mut ws);
            ula_step(&mut b, &p, 0.07, &mut nb, &mut ws);
            assert_eq!(st.gradient_evals, 1);
            assert_eq!(
                a.position.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                b.position.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn prlmc_hand_evaluation() {
        // θ = 1, η = 0.1, K = 2, H = (1, 1), ζ_1 = 0.5, ξ = 0.2, x = 1:
        // X̂_1 = 1 − 0.05 + √0.1·0.5; correction = 1 − X̂_1
        let mut s = ChainState::new(vec![1.0]);
        let mut ws = Workspace::new(1);
        let mut noise = ScriptedNoise {
            endpoint: vec![0.2],
            midpoint: vec![0.5],
            activations: vec![true, true],
            ..ScriptedNoise::zero()
        };
        let stats = prlmc_step(&mut s, &iso(1), 0.1, 2, MidpointNoiseMode::IndependentPerIndex, &mut noise, &mut ws);
        let probe = 1.0 - 0.05 + 0.1f64.sqrt() * 0.5;
        let expected = 1.0 - 0.1 + 0.1 * (1.0 - probe) + 0.2f64.sqrt() * 0.2;
        assert!((s.position[0] - expected).abs() < 1e-15);
        assert_eq!(stats, StepStats { gradient_evals: 2, triggered: 2 });
    }

    #[test]
    fn lazy_gradient_count() {
        let p = iso(2);
        let mut ws = Workspace::new(2);
        for pattern in [
            vec![false, false, false, false],
            vec![true, false, false, false],
            vec![false, true, false, true],
            vec![true, true, true, true],
        ] {
            let mut s = ChainState::new(vec![0.5, 0.5]);
            let mut noise = ScriptedNoise {
                activations: pattern.clone(),
                ..ScriptedNoise::zero()
            };
            let st = prlmc_step(&mut s, &p, 0.1, 4, MidpointNoiseMode::SharedDriver, &mut noise, &mut ws);
            let nonzero = pattern.iter().skip(1).filter(|&&h| h).count() as u32;
            let all = pattern.iter().filter(|&&h| h).count() as u32;
            assert_eq!(st.gradient_evals, 1 + nonzero);
            assert_eq!(st.triggered, all);
        }
    }
}
