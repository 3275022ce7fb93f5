//! Random inputs of a single step, addressed by purpose.
//!
//! Every draw a kernel needs comes through [`NoiseSource`]. The production
//! implementation, [`StepNoise`], derives an independent generator for each
//! `(trial, step, purpose)` triple from a master seed, so trajectories are
//! reproducible and individual draws can be replaced in tests
//! ([`ScriptedNoise`], [`SuppressMidpoints`]) without touching the kernels.

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

/// Source of the random inputs for one transition.
///
/// Gaussian purposes are stateless: asking twice for the same purpose within
/// a step returns the same values. Bernoulli draws are consumed in index order.
pub trait NoiseSource {
    /// Endpoint Gaussian `ξ_{k+1}`.
    fn endpoint_gaussian(&mut self, out: &mut [f64]);
    /// Midpoint Gaussian for candidate `index`. Index 0 doubles as the RLMC
    /// midpoint noise and the shared midpoint driver.
    fn midpoint_gaussian(&mut self, index: usize, out: &mut [f64]);
    /// Activation `H_{k,index}` with success probability `p`.
    fn bernoulli(&mut self, index: usize, p: f64) -> bool;
    /// RLMC midpoint time `u_k ~ U[0, 1]`.
    fn midpoint_time(&mut self) -> f64;
    /// Gaussians independent of every other purpose (conditional diffusion
    /// residuals, sub-step increments). Fills all of `out`.
    fn residual_gaussian(&mut self, out: &mut [f64]);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    EndpointGaussian,
    MidpointGaussian(usize),
    Bernoulli,
    MidpointTime,
    Residual,
    /// Seed of a derived [`RngPolicy`], see [`RngPolicy::fork`].
    Fork,
}

impl Purpose {
    fn code(self) -> u64 {
        match self {
            Self::EndpointGaussian => 1,
            Self::Bernoulli => 2,
            Self::MidpointTime => 3,
            Self::Residual => 4,
            Self::Fork => 5,
            Self::MidpointGaussian(i) => 16 + i as u64,
        }
    }
}

/// Master seed from which every stream is derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngPolicy {
    pub master_seed: u64,
}

impl Default for RngPolicy {
    fn default() -> Self {
        Self { master_seed: 0x5eed }
    }
}

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngPolicy {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    /// Seed of the stream keyed by `(trial, step, purpose)`.
    pub fn derive(&self, trial: u64, step: u64, purpose: Purpose) -> u64 {
        const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
        let mut h = mix64(self.master_seed ^ GOLDEN);
        for word in [trial, step, purpose.code()] {
            h = mix64(h.wrapping_add(GOLDEN) ^ mix64(word));
        }
        h
    }

    pub fn stream(&self, trial: u64, step: u64, purpose: Purpose) -> Xoshiro256PlusPlus {
        Xoshiro256PlusPlus::seed_from_u64(self.derive(trial, step, purpose))
    }

    /// A policy whose streams are independent of this one's, keyed by `tag`.
    pub fn fork(&self, tag: u64) -> Self {
        Self::new(self.derive(tag, 0, Purpose::Fork))
    }

    /// Noise for transition `step → step + 1` of `trial`.
    pub fn step_noise(&self, trial: u64, step: u64) -> StepNoise {
        StepNoise {
            policy: *self,
            trial,
            step,
            bernoulli: None,
        }
    }
}

/// Derived-stream noise for one step of one trial.
#[derive(Debug, Clone)]
pub struct StepNoise {
    policy: RngPolicy,
    trial: u64,
    step: u64,
    bernoulli: Option<Xoshiro256PlusPlus>,
}

fn fill_gaussian(rng: &mut Xoshiro256PlusPlus, out: &mut [f64]) {
    for o in out {
        *o = rng.sample(StandardNormal);
    }
}

impl NoiseSource for StepNoise {
    fn endpoint_gaussian(&mut self, out: &mut [f64]) {
        let mut rng = self
            .policy
            .stream(self.trial, self.step, Purpose::EndpointGaussian);
        fill_gaussian(&mut rng, out);
    }

    fn midpoint_gaussian(&mut self, index: usize, out: &mut [f64]) {
        let mut rng = self
            .policy
            .stream(self.trial, self.step, Purpose::MidpointGaussian(index));
        fill_gaussian(&mut rng, out);
    }

    fn bernoulli(&mut self, _index: usize, p: f64) -> bool {
        let (policy, trial, step) = (self.policy, self.trial, self.step);
        let rng = self
            .bernoulli
            .get_or_insert_with(|| policy.stream(trial, step, Purpose::Bernoulli));
        rng.random::<f64>() < p
    }

    fn midpoint_time(&mut self) -> f64 {
        self.policy
            .stream(self.trial, self.step, Purpose::MidpointTime)
            .random::<f64>()
    }

    fn residual_gaussian(&mut self, out: &mut [f64]) {
        let mut rng = self.policy.stream(self.trial, self.step, Purpose::Residual);
        fill_gaussian(&mut rng, out);
    }
}

/// Fixed draws, for reproducing hand computations.
///
/// Gaussian purposes repeat their scripted vector (zero-padded or truncated to
/// the requested length); Bernoulli index `i` reads `activations[i]`, false
/// when out of range.
#[derive(Debug, Clone, Default)]
pub struct ScriptedNoise {
    pub endpoint: Vec<f64>,
    pub midpoint: Vec<f64>,
    pub activations: Vec<bool>,
    pub midpoint_time: f64,
    pub residual: Vec<f64>,
}

impl ScriptedNoise {
    /// All Gaussians zero, no activations, `u = 0`.
    pub fn zero() -> Self {
        Self::default()
    }
}

fn copy_padded(src: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = src.get(i).copied().unwrap_or(0.0);
    }
}

impl NoiseSource for ScriptedNoise {
    fn endpoint_gaussian(&mut self, out: &mut [f64]) {
        copy_padded(&self.endpoint, out);
    }

    fn midpoint_gaussian(&mut self, _index: usize, out: &mut [f64]) {
        copy_padded(&self.midpoint, out);
    }

    fn bernoulli(&mut self, index: usize, _p: f64) -> bool {
        self.activations.get(index).copied().unwrap_or(false)
    }

    fn midpoint_time(&mut self) -> f64 {
        self.midpoint_time
    }

    fn residual_gaussian(&mut self, out: &mut [f64]) {
        copy_padded(&self.residual, out);
    }
}

/// Wraps another source and forces every activation `H_{k,i}` to zero.
#[derive(Debug, Clone)]
pub struct SuppressMidpoints<N>(pub N);

impl<N: NoiseSource> NoiseSource for SuppressMidpoints<N> {
    fn endpoint_gaussian(&mut self, out: &mut [f64]) {
        self.0.endpoint_gaussian(out)
    }

    fn midpoint_gaussian(&mut self, index: usize, out: &mut [f64]) {
        self.0.midpoint_gaussian(index, out)
    }

    fn bernoulli(&mut self, index: usize, p: f64) -> bool {
        // Keep the inner stream's consumption pattern unchanged.
        let _ = self.0.bernoulli(index, p);
        false
    }

    fn midpoint_time(&mut self) -> f64 {
        self.0.midpoint_time()
    }

    fn residual_gaussian(&mut self, out: &mut [f64]) {
        self.0.residual_gaussian(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forks_are_distinct_and_stable() {
        let p = RngPolicy::new(7);
        assert_eq!(p.fork(1), p.fork(1));
        assert_ne!(p.fork(1), p.fork(2));
        assert_ne!(p.fork(1), p);
        assert_ne!(p.fork(1).derive(0, 0, Purpose::EndpointGaussian), p.derive(0, 0, Purpose::EndpointGaussian));
    }

    #[test]
    fn gaussian_purposes_are_stateless_within_a_step() {
        let mut n = RngPolicy::new(7).step_noise(3, 11);
        let mut a = [0.0; 4];
        let mut b = [0.0; 4];
        n.endpoint_gaussian(&mut a);
        n.endpoint_gaussian(&mut b);
        assert_eq!(a, b);
        n.midpoint_gaussian(2, &mut b);
        assert_ne!(a, b);
    }

    #[test]
    fn streams_differ_across_keys() {
        let p = RngPolicy::new(1);
        let seeds = [
            p.derive(0, 0, Purpose::EndpointGaussian),
            p.derive(1, 0, Purpose::EndpointGaussian),
            p.derive(0, 1, Purpose::EndpointGaussian),
            p.derive(0, 0, Purpose::Bernoulli),
            p.derive(0, 0, Purpose::MidpointGaussian(0)),
            p.derive(0, 0, Purpose::MidpointGaussian(1)),
            RngPolicy::new(2).derive(0, 0, Purpose::EndpointGaussian),
        ];
        for i in 0..seeds.len() {
            for j in 0..i {
                assert_ne!(seeds[i], seeds[j]);
            }
        }
        // trial/step are not interchangeable
        assert_ne!(
            p.derive(5, 9, Purpose::Residual),
            p.derive(9, 5, Purpose::Residual)
        );
    }

    #[test]
    fn endpoint_and_midpoint_streams_are_uncorrelated() {
        let p = RngPolicy::new(99);
        let n = 100_000;
        let mut sum = 0.0;
        for step in 0..n {
            let mut s = p.step_noise(0, step);
            let mut a = [0.0];
            let mut b = [0.0];
            s.endpoint_gaussian(&mut a);
            s.midpoint_gaussian(1, &mut b);
            sum += a[0] * b[0];
        }
        let corr = sum / n as f64;
        assert!(corr.abs() < 4.0 / (n as f64).sqrt(), "corr = {corr}");
    }

    #[test]
    fn bernoulli_frequency() {
        let p = RngPolicy::new(4);
        let n = 200_000u64;
        let hits = (0..n)
            .filter(|&step| p.step_noise(0, step).bernoulli(0, 0.25))
            .count() as f64;
        let se = (0.25f64 * 0.75 / n as f64).sqrt();
        assert!((hits / n as f64 - 0.25).abs() < 4.0 * se);
    }

    #[test]
    fn suppression_forces_zero_activations() {
        let mut n = SuppressMidpoints(ScriptedNoise {
            activations: vec![true, true],
            ..ScriptedNoise::zero()
        });
        assert!(!n.bernoulli(0, 1.0));
        assert!(!n.bernoulli(1, 1.0));
    }
}
