//! Sampling kernels, the chain runner and the continuous-time references.

mod diffusion;
mod kernels;
mod noise;

pub use diffusion::{
    coupled_step_euler, coupled_step_ou, langevin_reference_step, ou_exact_step, OuBridge,
    REFERENCE_SUBSTEPS,
};
pub use kernels::{prlmc_step, rlmc_step, ula_step, MidpointNoiseMode, StepStats, Workspace};
pub use noise::{NoiseSource, Purpose, RngPolicy, ScriptedNoise, StepNoise, SuppressMidpoints};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::potential::{norm2, PotentialSpec};
use crate::schedule::StepSchedule;
use crate::theory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Algorithm {
    Ula,
    Rlmc,
    Prlmc { k: usize },
    /// PRLMC driven by the schedule's `γ_{n+1}` at step `n`.
    PrlmcDecreasing { k: usize },
}

impl Algorithm {
    pub fn midpoints(&self) -> Option<usize> {
        match *self {
            Self::Prlmc { k } | Self::PrlmcDecreasing { k } => Some(k),
            Self::Ula | Self::Rlmc => None,
        }
    }
}

/// Position of a chain together with its step counter and `t_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub position: Vec<f64>,
    pub step_index: u64,
    pub elapsed_time: f64,
}

impl ChainState {
    pub fn new(position: Vec<f64>) -> Self {
        Self {
            position,
            step_index: 0,
            elapsed_time: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub algorithm: Algorithm,
    pub potential: PotentialSpec,
    pub schedule: StepSchedule,
    pub initial: Vec<f64>,
    #[serde(default)]
    pub midpoint_noise_mode: MidpointNoiseMode,
    #[serde(default)]
    pub rng: RngPolicy,
}

impl SamplerConfig {
    pub fn new(
        algorithm: Algorithm,
        potential: PotentialSpec,
        schedule: StepSchedule,
        initial: Vec<f64>,
    ) -> Self {
        Self {
            algorithm,
            potential,
            schedule,
            initial,
            midpoint_noise_mode: MidpointNoiseMode::default(),
            rng: RngPolicy::default(),
        }
    }

    pub fn with_seed(mut self, master_seed: u64) -> Self {
        self.rng = RngPolicy::new(master_seed);
        self
    }

    pub fn with_mode(mut self, mode: MidpointNoiseMode) -> Self {
        self.midpoint_noise_mode = mode;
        self
    }

    /// Hard errors are returned; soft problems come back as warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let d = self.potential.dimension();
        if self.initial.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.initial.len(),
            });
        }
        if self.initial.iter().any(|v| !v.is_finite()) {
            return Err(invalid("initial state must be finite"));
        }
        self.schedule.check()?;
        if self.algorithm.midpoints() == Some(0) {
            return Err(invalid("K must be at least 1"));
        }
        let mut warnings = Vec::new();
        match self.algorithm {
            Algorithm::Ula | Algorithm::Rlmc | Algorithm::Prlmc { .. } => {
                let Some(eta) = self.schedule.constant_eta() else {
                    return Err(invalid(format!(
                        "{:?} requires a constant step schedule",
                        self.algorithm
                    )));
                };
                if let Algorithm::Prlmc { k } = self.algorithm {
                    let eta0 = theory::find_eta0(self.potential.m(), self.potential.l(), k)?;
                    if eta >= eta0 {
                        warnings.push(format!(
                            "η = {eta} ≥ η₀ = {eta0:.6}: stationarity guarantees do not apply"
                        ));
                    }
                }
            }
            Algorithm::PrlmcDecreasing { .. } => {}
        }
        Ok(warnings)
    }
}

/// A running chain for one trial.
#[derive(Debug, Clone)]
pub struct Chain<'a> {
    config: &'a SamplerConfig,
    trial: u64,
    state: ChainState,
    ws: Workspace,
    gradient_evals: u64,
    triggered: u64,
}

impl<'a> Chain<'a> {
    pub fn new(config: &'a SamplerConfig, trial: u64) -> Result<Self> {
        config.validate()?;
        Ok(Self::from_state(config, trial, ChainState::new(config.initial.clone())))
    }

    /// Chain resuming from an arbitrary state (the configured initial state is ignored).
    pub fn from_state(config: &'a SamplerConfig, trial: u64, state: ChainState) -> Self {
        let d = config.potential.dimension();
        Self {
            config,
            trial,
            state,
            ws: Workspace::new(d),
            gradient_evals: 0,
            triggered: 0,
        }
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    pub fn position(&self) -> &[f64] {
        &self.state.position
    }

    pub fn gradient_evals(&self) -> u64 {
        self.gradient_evals
    }

    pub fn triggered_midpoints(&self) -> u64 {
        self.triggered
    }

    /// Advances one step; fails on a non-finite position.
    pub fn step(&mut self) -> Result<StepStats> {
        let cfg = self.config;
        let step = self.state.step_index;
        let mut noise = cfg.rng.step_noise(self.trial, step);
        let eta = match cfg.algorithm {
            Algorithm::PrlmcDecreasing { .. } => cfg.schedule.gamma_unchecked(step + 1),
            _ => cfg.schedule.constant_eta().unwrap_or_else(|| cfg.schedule.gamma_unchecked(step + 1)),
        };
        let stats = match cfg.algorithm {
            Algorithm::Ula => ula_step(&mut self.state, &cfg.potential, eta, &mut noise, &mut self.ws),
            Algorithm::Rlmc => rlmc_step(&mut self.state, &cfg.potential, eta, &mut noise, &mut self.ws),
            Algorithm::Prlmc { k } | Algorithm::PrlmcDecreasing { k } => prlmc_step(
                &mut self.state,
                &cfg.potential,
                eta,
                k,
                cfg.midpoint_noise_mode,
                &mut noise,
                &mut self.ws,
            ),
        };
        if self.state.position.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence {
                step: self.state.step_index,
            });
        }
        self.gradient_evals += u64::from(stats.gradient_evals);
        self.triggered += u64::from(stats.triggered);
        Ok(stats)
    }

    pub fn advance(&mut self, steps: u64) -> Result<()> {
        for _ in 0..steps {
            self.step()?;
        }
        Ok(())
    }

    fn snapshot(&self) -> Checkpoint {
        Checkpoint {
            step: self.state.step_index,
            elapsed_time: self.state.elapsed_time,
            norm2: norm2(&self.state.position),
            position: self.state.position.clone(),
            gradient_evals: self.gradient_evals,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Checkpoint {
    pub step: u64,
    pub elapsed_time: f64,
    pub position: Vec<f64>,
    pub norm2: f64,
    pub gradient_evals: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub trial: u64,
    pub steps: u64,
    pub checkpoints: Vec<Checkpoint>,
    pub gradient_evals: u64,
    pub triggered_midpoints: u64,
}

/// Runs `n_steps` of the configured kernel for `trial`, recording the state at
/// each checkpoint (step counts, `0` being the initial state). With no
/// checkpoints, only the final state is recorded.
pub fn run_chain(
    config: &SamplerConfig,
    trial: u64,
    n_steps: u64,
    checkpoints: &[u64],
) -> Result<RunResult> {
    if checkpoints.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("checkpoints must be sorted"));
    }
    if checkpoints.last().is_some_and(|&c| c > n_steps) {
        return Err(invalid("checkpoints must not exceed the number of steps"));
    }
    let mut chain = Chain::new(config, trial)?;
    let mut out = Vec::with_capacity(checkpoints.len().max(1));
    let mut next = checkpoints.iter().peekable();
    loop {
        while next.peek().is_some_and(|&&c| c == chain.state.step_index) {
            out.push(chain.snapshot());
            next.next();
        }
        if chain.state.step_index >= n_steps {
            break;
        }
        chain.step()?;
    }
    if checkpoints.is_empty() {
        out.push(chain.snapshot());
    }
    Ok(RunResult {
        trial,
        steps: n_steps,
        checkpoints: out,
        gradient_evals: chain.gradient_evals,
        triggered_midpoints: chain.triggered,
    })
}
