//! Closed-form constants and bounds for PRLMC on a strongly convex target.
//!
//! Inputs are the potential's constants `m ≤ L`, the third-derivative bound
//! `L̃`, the number of candidate midpoints `K`, the dimension `d` and the step
//! size. Formulas are evaluated exactly as stated; the functions whose
//! guarantees only hold on a restricted step range do not refuse other steps,
//! [`TheoryBounds`] records admissibility instead.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::schedule::StepSchedule;

fn k_factors(k: usize) -> (f64, f64) {
    let inv = 1.0 / k as f64;
    (2.0 - inv, 1.0 - inv)
}

fn check_constants(m: f64, l: f64) -> Result<()> {
    if !(m.is_finite() && m > 0.0) {
        return Err(invalid(format!("m must be positive, got {m}")));
    }
    if !(l.is_finite() && l >= m) {
        return Err(invalid(format!("need m ≤ L, got m = {m}, L = {l}")));
    }
    Ok(())
}

/// Contraction rate `κ = 2mL/(m + L)`, which lies in `[m, 2m)`.
pub fn kappa(m: f64, l: f64) -> Result<f64> {
    check_constants(m, l)?;
    Ok(2.0 * m * l / (m + l))
}

/// Constants of the drift condition `Q_η V ≤ λ V + b 1_{D_η}` for `V = 1 + |x|²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovConstants {
    pub lambda: f64,
    pub b: f64,
    /// Radius `√(b/(mη))` of the small set `D_η`.
    pub radius: f64,
}

pub fn lyapunov_constants(m: f64, l: f64, k: usize, d: usize, eta: f64) -> LyapunovConstants {
    let (two_minus, one_minus) = k_factors(k);
    let d = d as f64;
    let l2 = l * l;
    let lambda = 1.0 - m * eta + (1.0 + 3.0 * l2) * eta.powi(2) + 4.0 * two_minus * l2 * l2 * eta.powi(4);
    let b = (m + 2.0 * d + l2 * one_minus) * eta
        + 4.0 * d * l2 * two_minus * eta.powi(3)
        + 4.0 * two_minus * eta.powi(4);
    LyapunovConstants {
        lambda,
        b,
        radius: (b / (m * eta)).sqrt(),
    }
}

/// `g(η) = −mη + (1 + 3L²)η² + 4(2 − 1/K)L⁴η⁴`.
///
/// Both `λ(η) < 1` and the moment contraction
/// `1 − 2mη + (1 + 3L²)η² + 4(2 − 1/K)L⁴η⁴ ≤ 1 − mη` reduce to `g(η) ≤ 0`,
/// and `g(η)/η` is increasing, so the admissible set is an interval `(0, η₀)`.
fn drift_excess(m: f64, l: f64, k: usize, eta: f64) -> f64 {
    let (two_minus, _) = k_factors(k);
    let l2 = l * l;
    -m * eta + (1.0 + 3.0 * l2) * eta * eta + 4.0 * two_minus * l2 * l2 * eta.powi(4)
}

/// Largest `η₀ ∈ (0, 1)` with `λ(η) < 1` and the moment contraction holding
/// on all of `(0, η₀)`, located by bisection to `1e-12`.
pub fn find_eta0(m: f64, l: f64, k: usize) -> Result<f64> {
    check_constants(m, l)?;
    if k == 0 {
        return Err(invalid("K must be at least 1"));
    }
    // g(1) = 1 − m + 3L² + 4(2 − 1/K)L⁴ > 0 whenever m ≤ L.
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if drift_excess(m, l, k, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo <= 0.0 {
        return Err(Error::Numerics("η₀ underflowed to zero".into()));
    }
    Ok(lo)
}

/// Bound on the stationary second moment:
/// `π_η(|x|²) ≤ (d/m){2 + 4η²L²(2 − 1/K) + L²(1 − 1/K)}`.
pub fn stationary_moment_bound(m: f64, l: f64, k: usize, d: usize, eta: f64) -> f64 {
    let (two_minus, one_minus) = k_factors(k);
    let l2 = l * l;
    d as f64 / m * (2.0 + 4.0 * eta * eta * l2 * two_minus + l2 * one_minus)
}

/// `W₂(π_η, π) ≤ (L/m)√η [(2d + 4η²Ld + 8L²η²d)^{1/2} + √(4 − 2/K)(ηL²·m₂/3 + d)^{1/2}]`
/// with `m₂` the supplied value of (or bound on) `π_η(|x|²)`.
pub fn w2_bias_bound_sqrt(m: f64, l: f64, k: usize, d: usize, eta: f64, pi_eta_m2: f64) -> f64 {
    let d = d as f64;
    let first = (2.0 * d + 4.0 * eta * eta * l * d + 8.0 * l * l * eta * eta * d).sqrt();
    let second = (4.0 - 2.0 / k as f64).sqrt() * (eta * l * l * pi_eta_m2 / 3.0 + d).sqrt();
    l / m * eta.sqrt() * (first + second)
}

/// Sharp bound on `W₂²(π, π_η)`, of order `η²`.
///
/// The moment factor `{2 + 4η²L²(2 − 1/K) + L²(1 − 1/K)}/m` multiplies
/// `L⁴[(8 − 4/K)η + 3/κ]`; the `L̃` term enters as `6κ⁻¹dL̃²` inside the braces.
pub fn w2_bias_bound_sharp(m: f64, l: f64, l_tilde: f64, k: usize, d: usize, eta: f64) -> Result<f64> {
    let kap = kappa(m, l)?;
    let inv_k = 1.0 / kap;
    let (two_minus, one_minus) = k_factors(k);
    let kk = 1.0 / k as f64;
    let d = d as f64;
    let l2 = l * l;
    let l4 = l2 * l2;
    let moment = (2.0 + 4.0 * eta * eta * l2 * two_minus + l2 * one_minus) / m;
    let braces = l2 * (10.0 - 4.0 * kk + l2 * eta * eta / 6.0 + 2.0 * inv_k * l2 * eta)
        + 6.0 * inv_k * d * l_tilde * l_tilde
        + moment * l4 * ((8.0 - 4.0 * kk) * eta + 3.0 * inv_k)
        + l4 * (eta + 3.0 * inv_k) / m;
    Ok(2.0 * inv_k * d * eta * eta * braces)
}

/// `(u₁, u₂)` of the non-asymptotic bound
/// `W₂²(L(Y_{t_n}), π) ≤ u₁(|x|² + d/m) + u₂` for the decreasing-step chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayBound {
    pub n: u64,
    pub u1: f64,
    pub u2: f64,
}

impl DecayBound {
    /// The bound on `W₂²` for an initial state with `|x|² = x0_norm2`.
    pub fn w2_squared(&self, x0_norm2: f64, d: usize, m: f64) -> f64 {
        self.u1 * (x0_norm2 + d as f64 / m) + self.u2
    }
}

/// Constants shared by every term of `u₂`.
#[derive(Debug, Clone, Copy)]
pub struct DecayInputs {
    pub m: f64,
    pub l: f64,
    pub l_tilde: f64,
    pub k: usize,
    pub d: usize,
    /// Stand-in for the non-explicit moment constant `C(1 + |x|²)`,
    /// typically `sup_k E|Y_{t_k}|²`.
    pub c_moment: f64,
}

/// Evaluates `(u₁, u₂)` at every requested `n` (sorted, each `≥ 1`) in one pass.
///
/// `u₁ = 2∏_{k≤n}(1 − κγ_k/2)` is accumulated in log space past `10⁴`
/// factors; `u₂` follows `a_n = a_{n−1}(1 − κγ_n/2) + γ_n³·{…}_n`.
pub fn decay_bound_trajectory(
    schedule: &StepSchedule,
    inputs: DecayInputs,
    at: &[u64],
) -> Result<Vec<DecayBound>> {
    let DecayInputs {
        m,
        l,
        l_tilde,
        k,
        d,
        c_moment,
    } = inputs;
    let kap = kappa(m, l)?;
    let violations = schedule.validate(m, 1.0 / (m + l));
    if let Some(v) = violations.first() {
        return Err(invalid(format!("schedule violates the decay hypotheses: {v}")));
    }
    if at.first() == Some(&0) || at.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("evaluation points must be sorted and at least 1"));
    }
    let inv_k = 1.0 / kap;
    let kk = 1.0 / k as f64;
    let df = d as f64;
    let l2 = l * l;
    let l4 = l2 * l2;

    let mut out = Vec::with_capacity(at.len());
    let mut product = 1.0f64;
    let mut log_product = 0.0f64;
    let mut acc = 0.0f64;
    let mut next = at.iter().peekable();
    let last = at.last().copied().unwrap_or(0);
    for n in 1..=last {
        let g = schedule.gamma_unchecked(n);
        let factor = 1.0 - kap * g / 2.0;
        if factor <= 0.0 {
            return Err(invalid(format!("1 − κγ_{n}/2 = {factor} is not positive")));
        }
        log_product += factor.ln();
        if n <= 10_000 {
            product *= factor;
        }
        let braces = l2 * df * (10.0 - 4.0 * kk + l2 * g * g / 6.0 + 2.0 * inv_k * l2 * g)
            + 6.0 * inv_k * df * df * l_tilde * l_tilde
            + c_moment * l4 * ((8.0 - 4.0 * kk) * g + 3.0 * inv_k)
            + df * l4 * (g + 3.0 * inv_k) / m;
        acc = acc * factor + g.powi(3) * braces;
        while next.peek().is_some_and(|&&c| c == n) {
            let p = if n <= 10_000 { product } else { log_product.exp() };
            out.push(DecayBound {
                n,
                u1: 2.0 * p,
                u2: acc,
            });
            next.next();
        }
    }
    Ok(out)
}

/// `(u₁, u₂)` at a single `n ≥ 1`.
pub fn wasserstein_decay_bound(schedule: &StepSchedule, inputs: DecayInputs, n: u64) -> Result<DecayBound> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    Ok(decay_bound_trajectory(schedule, inputs, &[n])?[0])
}

/// Right-hand side of the one-step conditional contraction of the synchronous
/// coupling, for step `γ` and free parameter `ε > 0`:
///
/// `{1 − γ(κ − 4ε)}|x − y|² + γ³{L⁴[γ + (3ε)⁻¹]|x|² + L⁴[(8 − 4/K)γ + (3ε)⁻¹]|y|²
///  + L²d[10 − 4/K + L²γ²/6 + (4ε)⁻¹L²γ] + 2(3ε)⁻¹d²L̃²}`
#[derive(Debug, Clone, Copy)]
pub struct CouplingBoundInputs {
    pub m: f64,
    pub l: f64,
    pub l_tilde: f64,
    pub k: usize,
    pub d: usize,
    pub gamma: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingBound {
    pub contraction: f64,
    pub remainder: f64,
    pub total: f64,
}

pub fn coupling_one_step_bound(
    inputs: CouplingBoundInputs,
    x_norm2: f64,
    y_norm2: f64,
    diff_norm2: f64,
) -> Result<CouplingBound> {
    let CouplingBoundInputs {
        m,
        l,
        l_tilde,
        k,
        d,
        gamma,
        epsilon,
    } = inputs;
    let kap = kappa(m, l)?;
    if !(epsilon > 0.0) {
        return Err(invalid("ε must be positive"));
    }
    let kk = 1.0 / k as f64;
    let df = d as f64;
    let l2 = l * l;
    let l4 = l2 * l2;
    let three_eps = 1.0 / (3.0 * epsilon);
    let four_eps = 1.0 / (4.0 * epsilon);
    let contraction = (1.0 - gamma * (kap - 4.0 * epsilon)) * diff_norm2;
    let remainder = gamma.powi(3)
        * (l4 * (gamma + three_eps) * x_norm2
            + l4 * ((8.0 - 4.0 * kk) * gamma + three_eps) * y_norm2
            + l2 * df * (10.0 - 4.0 * kk + l2 * gamma * gamma / 6.0 + four_eps * l2 * gamma)
            + 2.0 * three_eps * df * df * l_tilde * l_tilde);
    Ok(CouplingBound {
        contraction,
        remainder,
        total: contraction + remainder,
    })
}

/// `P(N = n)` for `N ~ Binomial(K, 1/K)`, the number of activated midpoints.
pub fn poisson_midpoint_pmf(k: usize, n: usize) -> Result<f64> {
    if k == 0 {
        return Err(invalid("K must be at least 1"));
    }
    if n > k {
        return Err(invalid(format!("n = {n} exceeds K = {k}")));
    }
    let kf = k as f64;
    let log_choose: f64 = (1..=n).map(|j| ((k - n + j) as f64 / j as f64).ln()).sum();
    let mut log_p = log_choose - n as f64 * kf.ln();
    if k > n {
        log_p += (k - n) as f64 * (-1.0 / kf).ln_1p();
    }
    Ok(log_p.exp())
}

/// `e⁻¹/n!`
pub fn poisson1_pmf(n: usize) -> f64 {
    let log_fact: f64 = (1..=n).map(|j| (j as f64).ln()).sum();
    (-1.0 - log_fact).exp()
}

/// Total variation between `Binomial(K, 1/K)` and `Poisson(1)`, summed over
/// `n ≤ max(K, 50)`; the Poisson tail beyond 50 is below `1e-60`.
pub fn midpoint_poisson_tv(k: usize) -> Result<f64> {
    let top = k.max(50);
    let mut tv = 0.0;
    for n in 0..=top {
        let b = if n <= k { poisson_midpoint_pmf(k, n)? } else { 0.0 };
        tv += (b - poisson1_pmf(n)).abs();
    }
    Ok(0.5 * tv)
}

/// `|x|²e^{−2mt} + (d/m)(1 − e^{−2mt})`; an equality for the
/// Ornstein–Uhlenbeck process with `θ = m`.
pub fn langevin_moment_bound(x_norm2: f64, m: f64, d: usize, t: f64) -> f64 {
    let decay = (-2.0 * m * t).exp();
    x_norm2 * decay + d as f64 / m * -(-2.0 * m * t).exp_m1()
}

/// Every closed-form quantity for one constant-step configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryBounds {
    pub m: f64,
    pub l: f64,
    pub l_tilde: f64,
    pub k: usize,
    pub d: usize,
    pub eta: f64,
    pub kappa: f64,
    pub lambda_eta: f64,
    pub b_eta: f64,
    pub d_eta_radius: f64,
    pub eta0: f64,
    /// `η < η₀`
    pub eta_below_eta0: bool,
    /// `η < min(η₀, 2/(m+L))`, the range of the √η bias bound.
    pub sqrt_bound_admissible: bool,
    /// `η < min(η₀, 1/(m+L))`, the range of the sharp bias bound.
    pub sharp_bound_admissible: bool,
    pub moment_bound: f64,
    /// √η bound with `π_η(|x|²)` replaced by `moment_bound`.
    pub w2_sqrt_bound: f64,
    /// Sharp bound on `W₂²`.
    pub w2_sharp_bound: f64,
    /// Square root of `w2_sharp_bound`.
    pub w2_sharp_bound_root: f64,
}

impl TheoryBounds {
    pub fn evaluate(m: f64, l: f64, l_tilde: f64, k: usize, d: usize, eta: f64) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(invalid(format!("η must be positive, got {eta}")));
        }
        let kap = kappa(m, l)?;
        let eta0 = find_eta0(m, l, k)?;
        let lya = lyapunov_constants(m, l, k, d, eta);
        let moment_bound = stationary_moment_bound(m, l, k, d, eta);
        let sharp = w2_bias_bound_sharp(m, l, l_tilde, k, d, eta)?;
        Ok(Self {
            m,
            l,
            l_tilde,
            k,
            d,
            eta,
            kappa: kap,
            lambda_eta: lya.lambda,
            b_eta: lya.b,
            d_eta_radius: lya.radius,
            eta0,
            eta_below_eta0: eta < eta0,
            sqrt_bound_admissible: eta < eta0.min(2.0 / (m + l)),
            sharp_bound_admissible: eta < eta0.min(1.0 / (m + l)),
            moment_bound,
            w2_sqrt_bound: w2_bias_bound_sqrt(m, l, k, d, eta, moment_bound),
            w2_sharp_bound: sharp,
            w2_sharp_bound_root: sharp.sqrt(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn kappa_values() {
        assert_eq!(kappa(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(kappa(1.0, 3.0).unwrap(), 1.5);
        assert_eq!(kappa(2.0, 2.0).unwrap(), 2.0);
        assert!(kappa(2.0, 1.0).is_err());
        for (m, l) in [(0.1, 10.0), (1.0, 1e6), (3.0, 3.5)] {
            let k = kappa(m, l).unwrap();
            assert!(m <= k && k < 2.0 * m);
        }
    }

    #[test]
    fn lyapunov_reference_values() {
        let c = lyapunov_constants(1.0, 1.0, 2, 1, 0.1);
        assert!(close(c.lambda, 0.9406, 1e-14));
        assert!(close(c.b, 0.3566, 1e-14));
        assert!(close(c.radius, (0.3566f64 / 0.1).sqrt(), 1e-14));
        assert!(close(c.radius, 1.8884, 1e-4));
    }

    /// Independent root of `4η + 6η³ = 1` (m = L = 1, K = 2) by Newton iteration.
    #[test]
    fn eta0_matches_cubic_root() {
        let mut x: f64 = 0.25;
        for _ in 0..50 {
            x -= (4.0 * x + 6.0 * x.powi(3) - 1.0) / (4.0 + 18.0 * x * x);
        }
        let eta0 = find_eta0(1.0, 1.0, 2).unwrap();
        assert!(close(eta0, x, 1e-11), "{eta0} vs {x}");
        assert!(close(eta0, 0.231_51, 1e-4));

        // K → ∞: 4η + 8η³ = 1
        let mut y: f64 = 0.25;
        for _ in 0..50 {
            y -= (4.0 * y + 8.0 * y.powi(3) - 1.0) / (4.0 + 24.0 * y * y);
        }
        let eta0_inf = find_eta0(1.0, 1.0, 1_000_000_000).unwrap();
        assert!(close(eta0_inf, y, 1e-8));
        assert!(eta0_inf < eta0);
    }

    #[test]
    fn eta0_properties() {
        for (m, l, k) in [(1.0, 1.0, 2), (0.5, 2.0, 4), (0.01, 1.0, 16), (2.0, 50.0, 1)] {
            let eta0 = find_eta0(m, l, k).unwrap();
            assert!(eta0 > 0.0 && eta0 < 1.0);
            assert!(lyapunov_constants(m, l, k, 3, eta0 / 2.0).lambda < 1.0);
            for frac in [0.01, 0.3, 0.9, 0.999] {
                let eta = eta0 * frac;
                assert!(lyapunov_constants(m, l, k, 1, eta).lambda < 1.0);
                let (two_minus, _) = k_factors(k);
                let lhs = 1.0 - 2.0 * m * eta + (1.0 + 3.0 * l * l) * eta * eta
                    + 4.0 * two_minus * l.powi(4) * eta.powi(4);
                assert!(lhs <= 1.0 - m * eta);
            }
            assert!(lyapunov_constants(m, l, k, 1, eta0 * 1.001).lambda >= 1.0);
        }
    }

    #[test]
    fn lambda_increasing_past_minimum() {
        let (m, l, k) = (1.0, 1.0, 2);
        let eta0 = find_eta0(m, l, k).unwrap();
        let grid: Vec<f64> = (1..=1000).map(|i| eta0 * i as f64 / 1000.0).collect();
        let lam: Vec<f64> = grid.iter().map(|&e| lyapunov_constants(m, l, k, 1, e).lambda).collect();
        let argmin = (0..lam.len()).min_by(|&a, &b| lam[a].total_cmp(&lam[b])).unwrap();
        assert!(lam[argmin..].windows(2).all(|w| w[1] > w[0]));
        assert!(lam[..lam.len() - 1].iter().all(|&v| v < 1.0));
    }

    #[test]
    fn moment_bound_values() {
        assert!(close(stationary_moment_bound(1.0, 1.0, 2, 1, 0.1), 2.56, 1e-14));
        let k1 = stationary_moment_bound(2.0, 3.0, 1, 4, 0.05);
        assert!(close(k1, 4.0 / 2.0 * (2.0 + 4.0 * 0.0025 * 9.0), 1e-14));
        let one = stationary_moment_bound(0.7, 1.3, 5, 1, 0.02);
        assert!(close(stationary_moment_bound(0.7, 1.3, 5, 6, 0.02), 6.0 * one, 1e-12));
    }

    #[test]
    fn sqrt_bound_value() {
        // (√0.1)[√(2 + 0.04 + 0.08) + √3·√(0.1·2.56/3 + 1)]
        let expected = 0.1f64.sqrt() * (2.12f64.sqrt() + 3f64.sqrt() * (0.256f64 / 3.0 + 1.0).sqrt());
        let b = w2_bias_bound_sqrt(1.0, 1.0, 2, 1, 0.1, 2.56);
        assert!(close(b, expected, 1e-14));
        assert!(close(b, 1.0311, 1e-4));
        let k1 = w2_bias_bound_sqrt(1.0, 1.0, 1, 1, 0.1, 2.56);
        let expected_k1 = 0.1f64.sqrt() * (2.12f64.sqrt() + 2f64.sqrt() * (0.256f64 / 3.0 + 1.0).sqrt());
        assert!(close(k1, expected_k1, 1e-14));
    }

    #[test]
    fn sharp_bound_value() {
        let b = w2_bias_bound_sharp(1.0, 1.0, 0.0, 2, 1, 0.1).unwrap();
        let braces = (8.0 + 0.01 / 6.0 + 0.2) + 2.56 * 3.6 + 3.1;
        assert!(close(b, 0.02 * braces, 1e-14));
        assert!(close(b, 0.41035, 1e-5));
        assert!(close(b.sqrt(), 0.6406, 1e-4));
        let with_lt = w2_bias_bound_sharp(1.0, 1.0, 0.5, 2, 3, 0.1).unwrap();
        let without = w2_bias_bound_sharp(1.0, 1.0, 0.0, 2, 3, 0.1).unwrap();
        // 2κ⁻¹dη²·6κ⁻¹dL̃² = 2·3·0.01·6·3·0.25
        assert!(close(with_lt - without, 2.0 * 3.0 * 0.01 * 6.0 * 3.0 * 0.25, 1e-12));
    }

    #[test]
    fn bias_bound_rates() {
        let etas: Vec<f64> = (0..8).map(|i| 0.1 * 0.5f64.powi(i)).collect();
        let sharp: Vec<f64> = etas
            .iter()
            .map(|&e| w2_bias_bound_sharp(1.0, 2.0, 0.3, 4, 2, e).unwrap().sqrt() / e)
            .collect();
        let root: Vec<f64> = etas
            .iter()
            .map(|&e| w2_bias_bound_sqrt(1.0, 2.0, 4, 2, e, stationary_moment_bound(1.0, 2.0, 4, 2, e)) / e.sqrt())
            .collect();
        for series in [&sharp, &root] {
            // successive ratios approach 1 as η halves
            let r: Vec<f64> = series.windows(2).map(|w| (w[1] / w[0] - 1.0).abs()).collect();
            assert!(r.windows(2).all(|w| w[1] < w[0]), "{series:?}");
            assert!(*r.last().unwrap() < 0.01, "{series:?}");
            let tail = &series[4..];
            assert!(tail.iter().all(|&v| v > 0.0 && v.is_finite()));
        }
    }

    #[test]
    fn decay_bound_first_step_and_monotonicity() {
        let s = StepSchedule::constant(0.1).unwrap();
        let inputs = DecayInputs {
            m: 1.0,
            l: 1.0,
            l_tilde: 0.0,
            k: 2,
            d: 1,
            c_moment: 1.0,
        };
        let b = wasserstein_decay_bound(&s, inputs, 1).unwrap();
        assert!(close(b.u1, 1.9, 1e-15));
        let braces = 1.0 * (10.0 - 2.0 + 0.01 / 6.0 + 0.2) + 1.0 * (0.6 + 3.0) + (0.1 + 3.0);
        assert!(close(b.u2, 1e-3 * braces, 1e-15));

        let ns: Vec<u64> = (1..=200).collect();
        let traj = decay_bound_trajectory(&s, inputs, &ns).unwrap();
        assert!(traj.windows(2).all(|w| w[1].u1 < w[0].u1));
        let ratio = traj[199].u1 / traj[198].u1;
        assert!(close(ratio, 0.95, 1e-12));
        // u₂ converges to its geometric-series limit γ³{…}/(κγ/2)
        assert!(close(traj[199].u2, 1e-3 * braces / 0.05, 1e-4));
    }

    #[test]
    fn decay_bound_log_space_agrees() {
        let s = StepSchedule::polynomial(4.0, 1.0, 7).unwrap();
        let inputs = DecayInputs {
            m: 1.0,
            l: 1.0,
            l_tilde: 0.0,
            k: 2,
            d: 1,
            c_moment: 2.0,
        };
        let traj = decay_bound_trajectory(&s, inputs, &[10_000, 10_001, 50_000]).unwrap();
        assert!(close(traj[1].u1 / traj[0].u1, 1.0 - s.gamma(10_001).unwrap() / 2.0, 1e-9));
        // ∏_{k≤n}(1 − 2/(k+7)) = ∏ (k+5)/(k+7) = 6·7/((n+6)(n+7))
        let exact = 2.0 * 42.0 / (50_006.0 * 50_007.0);
        assert!((traj[2].u1 / exact - 1.0).abs() < 1e-9);
        assert!(wasserstein_decay_bound(&StepSchedule::polynomial(4.0, 1.0, 0).unwrap(), inputs, 5).is_err());
    }

    #[test]
    fn coupling_bound_reduces_with_zero_states() {
        let inputs = CouplingBoundInputs {
            m: 1.0,
            l: 1.0,
            l_tilde: 0.0,
            k: 2,
            d: 1,
            gamma: 0.1,
            epsilon: 0.125,
        };
        let b = coupling_one_step_bound(inputs, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(b.contraction, 0.0);
        // γ³ L²d[10 − 2 + γ²/6 + 2γ]
        assert!(close(b.remainder, 1e-3 * (8.0 + 0.01 / 6.0 + 0.2), 1e-15));
        let b = coupling_one_step_bound(inputs, 1.0, 4.0, 2.0).unwrap();
        assert!(close(b.contraction, (1.0 - 0.1 * 0.5) * 2.0, 1e-15));
    }

    #[test]
    fn midpoint_pmf() {
        assert!(close(poisson_midpoint_pmf(4, 0).unwrap(), 0.316_406_25, 1e-15));
        assert!(poisson_midpoint_pmf(4, 5).is_err());
        assert!(close(poisson_midpoint_pmf(1, 1).unwrap(), 1.0, 1e-15));
        assert_eq!(poisson_midpoint_pmf(1, 0).unwrap(), 0.0);
        for k in [1, 2, 4, 16, 100, 1000] {
            let total: f64 = (0..=k).map(|n| poisson_midpoint_pmf(k, n).unwrap()).sum();
            assert!(close(total, 1.0, 1e-12));
        }
        assert!(close(poisson_midpoint_pmf(1_000_000, 0).unwrap(), (-1.0f64).exp(), 1e-6));
        assert!(close(poisson_midpoint_pmf(1_000_000, 3).unwrap(), poisson1_pmf(3), 1e-6));
        assert!(close(poisson1_pmf(0), 0.367_879_441_171_442_3, 1e-15));
    }

    #[test]
    fn binomial_poisson_tv_shrinks() {
        assert!(midpoint_poisson_tv(100).unwrap() < 0.01);
        let tvs: Vec<f64> = [2, 4, 16, 100, 1000].iter().map(|&k| midpoint_poisson_tv(k).unwrap()).collect();
        assert!(tvs.windows(2).all(|w| w[1] < w[0]));
        assert!(tvs[0] > 0.01);
    }

    #[test]
    fn langevin_moment_values() {
        assert_eq!(langevin_moment_bound(3.0, 1.0, 2, 0.0), 3.0);
        assert!(close(langevin_moment_bound(3.0, 0.5, 2, 1e3), 4.0, 1e-12));
        let v = langevin_moment_bound(4.0, 1.0, 1, 1.0);
        assert!(close(v, 4.0 * (-2.0f64).exp() + 1.0 - (-2.0f64).exp(), 1e-15));
        assert!(close(v, 1.40601, 1e-5));
    }

    #[test]
    fn bounds_bundle() {
        let t = TheoryBounds::evaluate(1.0, 1.0, 0.0, 2, 1, 0.1).unwrap();
        assert_eq!(t.kappa, 1.0);
        assert!(t.lambda_eta < 1.0 && t.eta_below_eta0);
        assert!(t.sharp_bound_admissible && t.sqrt_bound_admissible);
        assert!(close(t.w2_sharp_bound, 0.41035, 1e-5));
        let t = TheoryBounds::evaluate(1.0, 1.0, 0.0, 2, 1, 0.3).unwrap();
        assert!(!t.eta_below_eta0 && !t.sharp_bound_admissible);
        assert!(TheoryBounds::evaluate(1.0, 1.0, 0.0, 2, 1, 0.0).is_err());
    }
}
