//! Step-size sequences `γ_n`, their accumulated times `t_n`, and the
//! regularity statistic `ω = limsup (γ_n − γ_{n+1}) / γ_{n+1}²`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepSchedule {
    Constant {
        eta: f64,
    },
    /// `γ_n = c · (n + offset)^(−alpha)` for `n ≥ 1`.
    Polynomial {
        c: f64,
        alpha: f64,
        #[serde(default)]
        offset: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum ScheduleViolation {
    /// `2ω ≥ m`
    OmegaTooLarge { omega: f64, m: f64 },
    /// `γ_1 > upper`
    FirstStepTooLarge { gamma1: f64, upper: f64 },
}

impl std::fmt::Display for ScheduleViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::OmegaTooLarge { omega, m } => write!(f, "2ω = {} ≥ m = {m}", 2.0 * omega),
            Self::FirstStepTooLarge { gamma1, upper } => {
                write!(f, "γ_1 = {gamma1} exceeds the cap {upper}")
            }
        }
    }
}

impl StepSchedule {
    pub fn constant(eta: f64) -> Result<Self> {
        let s = Self::Constant { eta };
        s.check()?;
        Ok(s)
    }

    pub fn polynomial(c: f64, alpha: f64, offset: u64) -> Result<Self> {
        let s = Self::Polynomial { c, alpha, offset };
        s.check()?;
        Ok(s)
    }

    /// Polynomial schedule with the smallest offset `n₀` such that
    /// `γ_1 = c (1 + n₀)^(−alpha) ≤ upper`. The offset leaves `ω` unchanged.
    pub fn polynomial_capped(c: f64, alpha: f64, upper: f64) -> Result<Self> {
        Self::polynomial(c, alpha, 0)?;
        if !(upper > 0.0) {
            return Err(invalid("first-step cap must be positive"));
        }
        // (1 + n₀) ≥ (c / upper)^(1/alpha)
        let need = (c / upper).powf(1.0 / alpha);
        let mut offset = (need - 1.0).ceil().max(0.0) as u64;
        while offset > 0 && c * ((offset as f64)).powf(-alpha) <= upper {
            offset -= 1;
        }
        while c * ((1 + offset) as f64).powf(-alpha) > upper {
            offset += 1;
        }
        Self::polynomial(c, alpha, offset)
    }

    pub fn check(&self) -> Result<()> {
        match *self {
            Self::Constant { eta } => {
                if !(eta.is_finite() && eta > 0.0) {
                    return Err(invalid(format!("constant step must be positive, got {eta}")));
                }
            }
            Self::Polynomial { c, alpha, .. } => {
                if !(c.is_finite() && c > 0.0) {
                    return Err(invalid(format!("polynomial scale c must be positive, got {c}")));
                }
                if !(alpha > 0.0 && alpha <= 1.0) {
                    return Err(invalid(format!("polynomial exponent must lie in (0, 1], got {alpha}")));
                }
            }
        }
        Ok(())
    }

    /// The constant step, if this schedule is constant.
    pub fn constant_eta(&self) -> Option<f64> {
        match *self {
            Self::Constant { eta } => Some(eta),
            Self::Polynomial { .. } => None,
        }
    }

    /// `γ_n`, defined for `n ≥ 1`.
    pub fn gamma(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(invalid("step index starts at 1"));
        }
        Ok(self.gamma_unchecked(n))
    }

    #[inline]
    pub(crate) fn gamma_unchecked(&self, n: u64) -> f64 {
        match *self {
            Self::Constant { eta } => eta,
            Self::Polynomial { c, alpha, offset } => {
                let k = (n + offset) as f64;
                if alpha == 1.0 {
                    c / k
                } else {
                    c * k.powf(-alpha)
                }
            }
        }
    }

    /// `t_n = Σ_{i=1}^n γ_i`, with `t_0 = 0`.
    pub fn time(&self, n: u64) -> f64 {
        match *self {
            Self::Constant { eta } => eta * n as f64,
            Self::Polynomial { .. } => self.steps().take(n as usize).sum(),
        }
    }

    /// `γ_1, γ_2, …`
    pub fn steps(&self) -> impl Iterator<Item = f64> + '_ {
        (1u64..).map(move |n| self.gamma_unchecked(n))
    }

    pub fn omega(&self) -> f64 {
        match *self {
            Self::Constant { .. } => 0.0,
            Self::Polynomial { c, alpha, .. } => {
                if alpha < 1.0 {
                    0.0
                } else {
                    1.0 / c
                }
            }
        }
    }

    /// Hypotheses `2ω < m` and `γ_1 ≤ upper`; an empty list means both hold.
    pub fn validate(&self, m: f64, upper: f64) -> Vec<ScheduleViolation> {
        let mut out = Vec::new();
        let omega = self.omega();
        if 2.0 * omega >= m {
            out.push(ScheduleViolation::OmegaTooLarge { omega, m });
        }
        let gamma1 = self.gamma_unchecked(1);
        if gamma1 > upper {
            out.push(ScheduleViolation::FirstStepTooLarge { gamma1, upper });
        }
        out
    }
}
