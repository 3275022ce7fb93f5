use super::SampleBatch;
use crate::error::{invalid, Error, Result};

/// Largest batch accepted by [`w2_assignment`].
pub const MAX_ASSIGNMENT: usize = 256;

fn same_count(a: &SampleBatch, b: &SampleBatch) -> Result<()> {
    if a.len() != b.len() {
        return Err(invalid(format!(
            "batches have unequal counts {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

fn one_dimensional(b: &SampleBatch) -> Result<()> {
    if b.dimension() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: b.dimension(),
        });
    }
    Ok(())
}

/// Empirical `W₂` between two 1-D batches of equal size via the sorted
/// (quantile) coupling: `√(Σ (a₍ᵢ₎ − b₍ᵢ₎)² / n)`.
pub fn w2_1d(a: &SampleBatch, b: &SampleBatch) -> Result<f64> {
    one_dimensional(a)?;
    one_dimensional(b)?;
    same_count(a, b)?;
    let mut x = a.values().to_vec();
    let mut y = b.values().to_vec();
    x.sort_unstable_by(f64::total_cmp);
    y.sort_unstable_by(f64::total_cmp);
    let n = x.len() as f64;
    let cost: f64 = x.iter().zip(&y).map(|(u, v)| (u - v).powi(2)).sum();
    Ok((cost / n).sqrt())
}

/// `W₂(N(0, σ₁²I_d), N(0, σ₂²I_d)) = √d |σ₁ − σ₂|`.
pub fn w2_gaussian_isotropic(sigma1: f64, sigma2: f64, d: usize) -> Result<f64> {
    if !(sigma1 > 0.0 && sigma2 > 0.0) {
        return Err(invalid("standard deviations must be positive"));
    }
    Ok((d as f64).sqrt() * (sigma1 - sigma2).abs())
}

/// Exact discrete `W₂` between equal-size batches in any dimension:
/// the square root of the minimum mean squared Euclidean matching cost,
/// found with the O(n³) shortest-augmenting-path Hungarian method.
pub fn w2_assignment(a: &SampleBatch, b: &SampleBatch) -> Result<f64> {
    if a.dimension() != b.dimension() {
        return Err(Error::DimensionMismatch {
            expected: a.dimension(),
            got: b.dimension(),
        });
    }
    same_count(a, b)?;
    let n = a.len();
    if n > MAX_ASSIGNMENT {
        return Err(invalid(format!(
            "assignment is limited to {MAX_ASSIGNMENT} points, got {n}"
        )));
    }
    let cost: Vec<f64> = a
        .rows()
        .flat_map(|r| {
            b.rows()
                .map(move |s| r.iter().zip(s).map(|(u, v)| (u - v).powi(2)).sum::<f64>())
        })
        .collect();
    let matching = min_cost_assignment(n, &cost);
    let total: f64 = matching
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i * n + j])
        .sum();
    Ok((total / n as f64).sqrt())
}

/// Row-to-column assignment minimizing the summed cost of an `n × n`
/// row-major matrix.
pub(crate) fn min_cost_assignment(n: usize, cost: &[f64]) -> Vec<usize> {
    // 1-based potentials u (rows), v (columns); way[j] is the previous column
    // on the alternating path, owner[j] the row matched to column j.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        if owner[j] > 0 {
            assignment[owner[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Fixed-range histogram with one underflow and one overflow cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    lo: f64,
    hi: f64,
    counts: Vec<u64>,
}

impl Histogram {
    pub fn new(bins: usize, lo: f64, hi: f64) -> Result<Self> {
        if bins < 2 {
            return Err(invalid("need at least two bins"));
        }
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(invalid(format!("empty histogram range [{lo}, {hi}]")));
        }
        Ok(Self {
            lo,
            hi,
            counts: vec![0; bins + 2],
        })
    }

    pub fn bins(&self) -> usize {
        self.counts.len() - 2
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let bins = self.bins();
        let cell = if x < self.lo {
            0
        } else if x >= self.hi {
            bins + 1
        } else {
            let t = (x - self.lo) / (self.hi - self.lo) * bins as f64;
            1 + (t as usize).min(bins - 1)
        };
        self.counts[cell] += 1;
    }

    pub fn extend<I: IntoIterator<Item = f64>>(&mut self, xs: I) {
        for x in xs {
            self.add(x);
        }
    }

    /// Adds another histogram over the same grid.
    pub fn merge(&mut self, other: &Histogram) -> Result<()> {
        self.same_grid(other)?;
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Counts including the under- and overflow cells at either end.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    fn same_grid(&self, other: &Histogram) -> Result<()> {
        if self.lo != other.lo || self.hi != other.hi || self.counts.len() != other.counts.len() {
            return Err(invalid("histograms are on different grids"));
        }
        Ok(())
    }

    /// Half the L1 distance between the normalized cell frequencies.
    pub fn tv(&self, other: &Histogram) -> Result<f64> {
        self.same_grid(other)?;
        let (na, nb) = (self.total() as f64, other.total() as f64);
        if na == 0.0 || nb == 0.0 {
            return Err(invalid("empty histogram"));
        }
        let l1: f64 = self
            .counts
            .iter()
            .zip(&other.counts)
            .map(|(&a, &b)| (a as f64 / na - b as f64 / nb).abs())
            .sum();
        Ok(0.5 * l1)
    }
}

/// Total-variation estimate between two 1-D batches: half the L1 distance
/// between histogram frequencies on `bins` equal cells over `[lo, hi)`, with
/// mass outside the range kept in two tail cells.
pub fn tv_1d_histogram(a: &SampleBatch, b: &SampleBatch, bins: usize, lo: f64, hi: f64) -> Result<f64> {
    one_dimensional(a)?;
    one_dimensional(b)?;
    let mut ha = Histogram::new(bins, lo, hi)?;
    let mut hb = Histogram::new(bins, lo, hi)?;
    ha.extend(a.values().iter().copied());
    hb.extend(b.values().iter().copied());
    ha.tv(&hb)
}
