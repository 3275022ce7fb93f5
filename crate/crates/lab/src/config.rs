//! Experiment configuration: one JSON document per run.
//!
//! ```json
//! {
//!   "experiment": "bias-sweep",
//!   "sampler": {
//!     "algorithm": { "kind": "prlmc", "k": 2 },
//!     "potential": { "kind": "isotropic_quadratic", "theta": 1.0, "dimension": 1 },
//!     "schedule": { "kind": "constant", "eta": 0.1 },
//!     "initial": [0.0]
//!   },
//!   "trials": 100,
//!   "eta_grid": [0.025, 0.05, 0.1, 0.2],
//!   "master_seed": 7,
//!   "params": { "samples": 1000000 }
//! }
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use prlmc_core::sampler::{RngPolicy, SamplerConfig};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Run,
    BiasSweep,
    DriftCheck,
    CouplingCheck,
    TvDecay,
    DecreasingStep,
    MidpointLaw,
    StrongError,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Self::Run,
        Self::BiasSweep,
        Self::DriftCheck,
        Self::CouplingCheck,
        Self::TvDecay,
        Self::DecreasingStep,
        Self::MidpointLaw,
        Self::StrongError,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Run => "run",
            Self::BiasSweep => "bias-sweep",
            Self::DriftCheck => "drift-check",
            Self::CouplingCheck => "coupling-check",
            Self::TvDecay => "tv-decay",
            Self::DecreasingStep => "decreasing-step",
            Self::MidpointLaw => "midpoint-law",
            Self::StrongError => "strong-error",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = LabError;

    fn from_str(s: &str) -> LabResult<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| LabError::config(format!("unknown experiment {s:?}")))
    }
}

/// Experiment-specific knobs. Every field has a default suited to the
/// experiment that reads it; the others ignore it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Stationary samples per step size (bias-sweep) and per reference
    /// batch (tv-decay).
    pub samples: u64,
    /// `|x|` of the drift-check probe states, placed along the first axis.
    pub probe_radii: Vec<f64>,
    /// Coupling-check probe pairs `(x, y)`; default: ten pairs on the first axis.
    pub probes: Option<Vec<(Vec<f64>, Vec<f64>)>>,
    /// Coupling slack `ε`; default `κ/8`.
    pub epsilon: Option<f64>,
    /// Histogram bins and range for total-variation estimates.
    pub bins: usize,
    pub range: (f64, f64),
    /// Independent long chains pooled into a stationary batch.
    pub reference_chains: u64,
    /// TV values above this are excluded from the decay fit (near-disjoint supports).
    pub saturation: f64,
    /// Required TV at the last checkpoint.
    pub terminal_tv: f64,
    /// Stand-in for the moment constant of the decreasing-step bound; default
    /// from the exact moment recursion.
    pub c_moment: Option<f64>,
    /// Horizon `t` of the exact-moment order check for decreasing steps.
    pub order_horizon: f64,
    /// Largest allowed max/min of `W₂/γ_n` over the last five checkpoints.
    pub order_spread: f64,
    /// Accepted fitted slope range; default depends on the experiment.
    pub slope_window: Option<(f64, f64)>,
    /// Minimum r² of a rate fit; default depends on the experiment.
    pub min_r2: Option<f64>,
    /// `K` values for the analytic binomial/Poisson comparison.
    pub k_grid: Vec<usize>,
    /// Standard-error multiple used in every one-sided comparison.
    pub z: f64,
    /// Groups for batch-means standard errors.
    pub groups: usize,
    /// Write raw sample batches next to the CSV tables.
    pub write_samples: bool,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            samples: 1_000_000,
            probe_radii: vec![0.0, 0.5, 1.0, 2.0, 5.0, 20.0],
            probes: None,
            epsilon: None,
            bins: 100,
            range: (-5.0, 5.0),
            reference_chains: 1_000,
            saturation: 0.5,
            terminal_tv: 0.02,
            c_moment: None,
            order_horizon: 50.0,
            order_spread: 2.0,
            slope_window: None,
            min_r2: None,
            k_grid: vec![1, 2, 4, 10, 100, 1000],
            z: 3.0,
            groups: 10,
            write_samples: true,
        }
    }
}

fn one() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Must match the command line experiment when present.
    #[serde(default)]
    pub experiment: Option<Experiment>,
    pub sampler: SamplerConfig,
    #[serde(default = "one")]
    pub trials: u64,
    #[serde(default)]
    pub steps: u64,
    #[serde(default)]
    pub checkpoints: Vec<u64>,
    #[serde(default)]
    pub eta_grid: Vec<f64>,
    /// Overrides `sampler.rng`.
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub params: Params,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> LabResult<Self> {
        let mut cfg: Self = serde_json::from_str(text).map_err(|e| LabError::config(e.to_string()))?;
        cfg.sampler.rng = RngPolicy::new(cfg.master_seed);
        Ok(cfg)
    }

    pub fn load(path: &Path) -> LabResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| LabError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self.sampler.rng = RngPolicy::new(seed);
        self
    }

    /// Structural checks shared by all experiments.
    pub fn check(&self, experiment: Experiment) -> LabResult<()> {
        if let Some(e) = self.experiment {
            if e != experiment {
                return Err(LabError::config(format!(
                    "config is for {e}, but {experiment} was requested"
                )));
            }
        }
        if self.trials == 0 {
            return Err(LabError::config("trials must be positive"));
        }
        if self.checkpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(LabError::config("checkpoints must be strictly increasing"));
        }
        if self.eta_grid.iter().any(|&e| !(e.is_finite() && e > 0.0)) {
            return Err(LabError::config("eta_grid entries must be positive"));
        }
        let p = &self.params;
        if !(p.z.is_finite() && p.z > 0.0) {
            return Err(LabError::config("params.z must be positive"));
        }
        if p.groups < 2 {
            return Err(LabError::config("params.groups must be at least 2"));
        }
        if p.samples == 0 {
            return Err(LabError::config("params.samples must be positive"));
        }
        Ok(())
    }

    pub fn theta(&self) -> LabResult<f64> {
        self.sampler
            .potential
            .isotropic_theta()
            .ok_or_else(|| LabError::config("this experiment needs an isotropic quadratic potential"))
    }

    pub fn dimension(&self) -> usize {
        self.sampler.potential.dimension()
    }

    pub fn k(&self) -> LabResult<usize> {
        self.sampler
            .algorithm
            .midpoints()
            .ok_or_else(|| LabError::config("this experiment needs a PRLMC algorithm"))
    }

    pub fn eta(&self) -> LabResult<f64> {
        self.sampler
            .schedule
            .constant_eta()
            .ok_or_else(|| LabError::config("this experiment needs a constant step schedule"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "sampler": {
            "algorithm": { "kind": "prlmc", "k": 2 },
            "potential": { "kind": "isotropic_quadratic", "theta": 1.0, "dimension": 1 },
            "schedule": { "kind": "constant", "eta": 0.1 },
            "initial": [0.0]
        }
    }"#;

    #[test]
    fn defaults() {
        let c = ExperimentConfig::from_json(BASE).unwrap();
        assert_eq!(c.trials, 1);
        assert_eq!(c.params, Params::default());
        assert_eq!(c.k().unwrap(), 2);
        assert_eq!(c.eta().unwrap(), 0.1);
        assert_eq!(c.theta().unwrap(), 1.0);
        c.check(Experiment::Run).unwrap();
    }

    #[test]
    fn seed_overrides_sampler_policy() {
        let c = ExperimentConfig::from_json(&BASE.replacen('{', r#"{"master_seed": 9,"#, 1)).unwrap();
        assert_eq!(c.sampler.rng, RngPolicy::new(9));
        assert_eq!(c.with_seed(4).sampler.rng, RngPolicy::new(4));
    }

    #[test]
    fn rejects_unknown_fields_and_mismatch() {
        let typo = BASE.replacen('{', r#"{"trails": 3,"#, 1);
        assert!(ExperimentConfig::from_json(&typo).is_err());
        let other = BASE.replacen('{', r#"{"experiment": "tv-decay","#, 1);
        let c = ExperimentConfig::from_json(&other).unwrap();
        assert!(c.check(Experiment::TvDecay).is_ok());
        assert_eq!(c.check(Experiment::Run).unwrap_err().exit_code(), 3);
    }

    #[test]
    fn experiment_names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
            let json = serde_json::to_string(&e).unwrap();
            assert_eq!(json, format!("\"{}\"", e.name()));
        }
        assert!("bias".parse::<Experiment>().is_err());
    }
}
