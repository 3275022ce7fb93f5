//! Poisson randomized midpoint Langevin Monte Carlo.
//!
//! The crate is split by concern:
//!
//! * [`potential`]: strongly convex targets `U` with certified constants `m`, `L`, `L̃`.
//! * [`schedule`]: constant and polynomially decreasing step sequences.
//! * [`sampler`]: the ULA, RLMC and PRLMC kernels, the chain runner, exact
//!   Ornstein–Uhlenbeck transitions and the synchronous coupling.
//! * [`theory`]: closed-form constants and bounds (drift, moment, bias, decay).
//! * [`metrics`]: Wasserstein / total-variation estimators, exact moment
//!   recursions for quadratic targets and rate fitting.
//!
//! ```
//! use prlmc_core::potential::PotentialSpec;
//! use prlmc_core::sampler::{Algorithm, SamplerConfig, run_chain};
//! use prlmc_core::schedule::StepSchedule;
//!
//! let config = SamplerConfig::new(
//!     Algorithm::Prlmc { k: 4 },
//!     PotentialSpec::isotropic(1.0, 2).unwrap(),
//!     StepSchedule::constant(0.05).unwrap(),
//!     vec![1.0, -1.0],
//! );
//! let run = run_chain(&config, 0, 100, &[50, 100]).unwrap();
//! assert_eq!(run.checkpoints.len(), 2);
//! ```

pub mod error;
pub mod metrics;
pub mod potential;
pub mod sampler;
pub mod schedule;
pub mod theory;

pub use error::{Error, Result};
