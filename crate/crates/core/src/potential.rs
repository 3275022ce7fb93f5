//! Strongly convex potentials minimized at the origin.
//!
//! Every potential carries the constants the bounds in [`crate::theory`] need:
//! the strong convexity constant `m`, the gradient Lipschitz constant `L`, and
//! `l_tilde`, a bound on the operator norm of the third derivative.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialKind {
    /// `U(x) = (θ/2)|x|²`
    IsotropicQuadratic { theta: f64 },
    /// `U(x) = ½ Σ λᵢ xᵢ²`
    AnisotropicQuadratic { spectrum: Vec<f64> },
    /// `U(x) = (θ/2)|x|² + α Σ log cosh(xᵢ)`
    QuadraticLogCosh { theta: f64, alpha: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PotentialDef {
    #[serde(flatten)]
    kind: PotentialKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dimension: Option<usize>,
}

/// A target potential together with its certified constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PotentialDef", into = "PotentialDef")]
pub struct PotentialSpec {
    kind: PotentialKind,
    dimension: usize,
    m: f64,
    l: f64,
    l_tilde: f64,
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

fn nonzero_dimension(d: usize) -> Result<usize> {
    if d == 0 {
        Err(invalid("dimension must be at least 1"))
    } else {
        Ok(d)
    }
}

impl PotentialSpec {
    pub fn isotropic(theta: f64, dimension: usize) -> Result<Self> {
        let theta = positive("theta", theta)?;
        Ok(Self {
            kind: PotentialKind::IsotropicQuadratic { theta },
            dimension: nonzero_dimension(dimension)?,
            m: theta,
            l: theta,
            l_tilde: 0.0,
        })
    }

    pub fn anisotropic(spectrum: Vec<f64>) -> Result<Self> {
        let dimension = nonzero_dimension(spectrum.len())?;
        for &s in &spectrum {
            positive("spectrum entry", s)?;
        }
        let m = spectrum.iter().copied().fold(f64::INFINITY, f64::min);
        let l = spectrum.iter().copied().fold(0.0, f64::max);
        Ok(Self {
            kind: PotentialKind::AnisotropicQuadratic { spectrum },
            dimension,
            m,
            l,
            l_tilde: 0.0,
        })
    }

    /// `l_tilde` is declared as `alpha`; the true bound is `4α/(3√3) ≈ 0.77α`.
    pub fn quadratic_log_cosh(theta: f64, alpha: f64, dimension: usize) -> Result<Self> {
        let theta = positive("theta", theta)?;
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(invalid(format!("alpha must be nonnegative, got {alpha}")));
        }
        Ok(Self {
            kind: PotentialKind::QuadraticLogCosh { theta, alpha },
            dimension: nonzero_dimension(dimension)?,
            m: theta,
            l: theta + alpha,
            l_tilde: alpha,
        })
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Strong convexity constant.
    pub fn m(&self) -> f64 {
        self.m
    }

    /// Gradient Lipschitz constant.
    pub fn l(&self) -> f64 {
        self.l
    }

    /// Third-derivative bound.
    pub fn l_tilde(&self) -> f64 {
        self.l_tilde
    }

    /// `θ` when the potential is an isotropic quadratic.
    pub fn isotropic_theta(&self) -> Option<f64> {
        match self.kind {
            PotentialKind::IsotropicQuadratic { theta } => Some(theta),
            _ => None,
        }
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        let v = match &self.kind {
            PotentialKind::IsotropicQuadratic { theta } => 0.5 * theta * norm2(x),
            PotentialKind::AnisotropicQuadratic { spectrum } => {
                0.5 * spectrum.iter().zip(x).map(|(s, xi)| s * xi * xi).sum::<f64>()
            }
            PotentialKind::QuadraticLogCosh { theta, alpha } => {
                0.5 * theta * norm2(x) + alpha * x.iter().map(|&xi| log_cosh(xi)).sum::<f64>()
            }
        };
        Ok(v)
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        let mut out = vec![0.0; self.dimension];
        self.gradient_into(x, &mut out);
        Ok(out)
    }

    /// Writes `∇U(x)` into `out`. Lengths are the caller's responsibility.
    #[inline]
    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dimension);
        debug_assert_eq!(out.len(), self.dimension);
        match &self.kind {
            PotentialKind::IsotropicQuadratic { theta } => {
                for (o, xi) in out.iter_mut().zip(x) {
                    *o = theta * xi;
                }
            }
            PotentialKind::AnisotropicQuadratic { spectrum } => {
                for ((o, xi), s) in out.iter_mut().zip(x).zip(spectrum) {
                    *o = s * xi;
                }
            }
            PotentialKind::QuadraticLogCosh { theta, alpha } => {
                for (o, xi) in out.iter_mut().zip(x) {
                    *o = theta * xi + alpha * xi.tanh();
                }
            }
        }
    }
}

impl TryFrom<PotentialDef> for PotentialSpec {
    type Error = Error;

    fn try_from(def: PotentialDef) -> Result<Self> {
        let spec = match def.kind {
            PotentialKind::IsotropicQuadratic { theta } => {
                Self::isotropic(theta, def.dimension.unwrap_or(1))?
            }
            PotentialKind::AnisotropicQuadratic { spectrum } => Self::anisotropic(spectrum)?,
            PotentialKind::QuadraticLogCosh { theta, alpha } => {
                Self::quadratic_log_cosh(theta, alpha, def.dimension.unwrap_or(1))?
            }
        };
        if let Some(d) = def.dimension {
            if d != spec.dimension {
                return Err(Error::DimensionMismatch {
                    expected: spec.dimension,
                    got: d,
                });
            }
        }
        Ok(spec)
    }
}

impl From<PotentialSpec> for PotentialDef {
    fn from(p: PotentialSpec) -> Self {
        PotentialDef {
            kind: p.kind,
            dimension: Some(p.dimension),
        }
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// `log cosh(x)` without overflow for large `|x|`.
fn log_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}
