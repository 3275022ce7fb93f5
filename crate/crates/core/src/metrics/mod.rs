//! Distance estimators, summary statistics, exact second-moment recursions
//! for quadratic targets, and rate fitting.

pub mod io;
mod moments;
mod transport;

pub use moments::{anisotropic_fixed_point, decreasing_moment_trajectory, quadratic_prlmc_moment_oracle, MomentPoint, MomentRecursion};
pub use transport::{tv_1d_histogram, w2_1d, w2_assignment, w2_gaussian_isotropic, Histogram, MAX_ASSIGNMENT};

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{invalid, Error, Result};

/// `n` samples of dimension `d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    dimension: usize,
    data: Vec<f64>,
}

impl SampleBatch {
    pub fn new(dimension: usize, data: Vec<f64>) -> Result<Self> {
        if dimension == 0 {
            return Err(invalid("batch dimension must be at least 1"));
        }
        if data.is_empty() || data.len() % dimension != 0 {
            return Err(invalid(format!(
                "batch of {} values does not hold a positive number of {dimension}-vectors",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(invalid("batch entries must be finite"));
        }
        Ok(Self { dimension, data })
    }

    /// One-dimensional batch.
    pub fn scalar(values: Vec<f64>) -> Result<Self> {
        Self::new(1, values)
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let d = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        if rows.iter().any(|r| r.as_ref().len() != d) {
            return Err(invalid("rows have unequal lengths"));
        }
        Self::new(d, rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dimension
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dimension)
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    /// Coordinate `j` of every sample, as a 1-D batch.
    pub fn column(&self, j: usize) -> Result<SampleBatch> {
        if j >= self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: j,
            });
        }
        Ok(SampleBatch {
            dimension: 1,
            data: self.rows().map(|r| r[j]).collect(),
        })
    }

    /// Per-sample squared norms.
    pub fn norm2(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows().map(|r| r.iter().map(|v| v * v).sum())
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl MeanEstimate {
    /// Welford accumulation; `se = sd/√n` with the unbiased variance.
    pub fn from_iter<I: IntoIterator<Item = f64>>(values: I) -> Result<Self> {
        let mut n = 0usize;
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for v in values {
            n += 1;
            let delta = v - mean;
            mean += delta / n as f64;
            m2 += delta * (v - mean);
        }
        if n == 0 {
            return Err(invalid("mean of an empty sample"));
        }
        let se = if n > 1 {
            (m2 / (n - 1) as f64 / n as f64).sqrt()
        } else {
            f64::INFINITY
        };
        Ok(Self { mean, se, n })
    }

    /// `|mean − target| ≤ z·se`
    pub fn agrees_with(&self, target: f64, z: f64) -> bool {
        (self.mean - target).abs() <= z * self.se
    }
}

/// Least-squares line with goodness of fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Standard error of the slope (NaN with fewer than three points).
    pub slope_se: f64,
}

/// Ordinary least squares of `ys` on `xs`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(invalid("fit inputs have unequal lengths"));
    }
    if xs.len() < 2 {
        return Err(invalid("need at least two points to fit a line"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("fit abscissae are all equal"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    let slope_se = if xs.len() > 2 {
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    Ok(LinearFit {
        slope,
        intercept,
        r2,
        slope_se,
    })
}

/// Least squares on `(log x, log y)`; needs at least three positive points.
pub fn fit_loglog_slope(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() < 3 {
        return Err(invalid("need at least three points for a rate fit"));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(invalid("rate fit needs positive finite inputs"));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly)
}

/// Pearson chi-square goodness of fit of `counts` against `probs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Cells with expected count below 5 are pooled into their neighbour, scanning
/// from the right, so the asymptotic distribution applies.
pub fn chi_square_test(counts: &[u64], probs: &[f64]) -> Result<ChiSquareTest> {
    if counts.len() != probs.len() || counts.is_empty() {
        return Err(invalid("counts and probabilities must have equal nonzero length"));
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(invalid("no observations"));
    }
    let total = total as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pending = (0.0, 0.0);
    for (&c, &p) in counts.iter().zip(probs).rev() {
        pending.0 += c as f64;
        pending.1 += p * total;
        if pending.1 >= 5.0 {
            cells.push(pending);
            pending = (0.0, 0.0);
        }
    }
    if pending.1 > 0.0 || pending.0 > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += pending.0;
                last.1 += pending.1;
            }
            None => cells.push(pending),
        }
    }
    if cells.len() < 2 {
        return Err(invalid("fewer than two cells after pooling"));
    }
    let statistic: f64 = cells
        .iter()
        .map(|&(obs, exp)| (obs - exp).powi(2) / exp)
        .sum();
    let dof = cells.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::Numerics(e.to_string()))?;
    Ok(ChiSquareTest {
        statistic,
        dof,
        p_value: dist.sf(statistic),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batch_shape_checks() {
        assert!(SampleBatch::new(2, vec![1.0, 2.0, 3.0]).is_err());
        assert!(SampleBatch::new(1, vec![]).is_err());
        assert!(SampleBatch::new(1, vec![f64::NAN]).is_err());
        let b = SampleBatch::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b.row(1), &[3.0, 4.0]);
        assert_eq!(b.column(1).unwrap().values(), &[2.0, 4.0]);
        assert_eq!(b.norm2().collect::<Vec<_>>(), vec![5.0, 25.0]);
    }

    #[test]
    fn mean_estimate() {
        let e = MeanEstimate::from_iter([1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(e.mean, 2.5);
        assert!((e.se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert!(MeanEstimate::from_iter(std::iter::empty()).is_err());
    }

    #[test]
    fn loglog_fits() {
        let xs = [0.5, 1.0, 2.0, 4.0, 8.0];
        let f = fit_loglog_slope(&xs, &xs).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-12 && (f.r2 - 1.0).abs() < 1e-12);
        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        assert!((fit_loglog_slope(&xs, &sq).unwrap().slope - 2.0).abs() < 1e-12);
        let p: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(1.5)).collect();
        let f = fit_loglog_slope(&xs, &p).unwrap();
        assert!((f.slope - 1.5).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        assert!(fit_loglog_slope(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(fit_loglog_slope(&[1.0, 2.0, 0.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(fit_loglog_slope(&[1.0, 2.0, 3.0], &[1.0, -2.0, 3.0]).is_err());
    }

    #[test]
    fn chi_square_detects_mismatch() {
        let probs = [0.25, 0.25, 0.25, 0.25];
        let fair = chi_square_test(&[2500, 2480, 2530, 2490], &probs).unwrap();
        assert!(fair.p_value > 0.1);
        assert_eq!(fair.dof, 3);
        let skew = chi_square_test(&[3000, 2300, 2400, 2300], &probs).unwrap();
        assert!(skew.p_value < 1e-6);
    }

    #[test]
    fn chi_square_pools_sparse_cells() {
        let t = chi_square_test(&[90, 9, 1, 0], &[0.9, 0.09, 0.009, 0.001]).unwrap();
        // cells: {0.9}, {0.09 + 0.009 + 0.001}
        assert_eq!(t.dof, 1);
    }
}
