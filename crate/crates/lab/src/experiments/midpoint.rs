//! Law of the number of activated midpoints per step.
//!
//! Tables: `counts.csv` (`count, observed, expected`), `poisson_tv.csv`
//! (`k, tv`).

use prlmc_core::metrics::{chi_square_test, MeanEstimate};
use prlmc_core::sampler::Chain;
use prlmc_core::theory::{midpoint_poisson_tv, poisson_midpoint_pmf};

use super::par_map;
use crate::config::ExperimentConfig;
use crate::error::{LabError, LabResult};
use crate::report::{ExperimentReport, Table, Verdict};

const REFERENCE: &str = "Binomial(K, 1/K) activation law and its Poisson(1) limit";

pub(super) fn execute(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> LabResult<()> {
    let k = cfg.k()?;
    if cfg.steps == 0 {
        return Err(LabError::config("midpoint-law needs steps > 0"));
    }
    let p = &cfg.params;
    let per_trial = par_map(cfg.trials, |t| -> LabResult<Vec<u64>> {
        let mut chain = Chain::new(&cfg.sampler, t)?;
        let mut counts = vec![0u64; k + 1];
        for _ in 0..cfg.steps {
            counts[chain.step()?.triggered as usize] += 1;
        }
        Ok(counts)
    });
    let mut counts = vec![0u64; k + 1];
    for c in per_trial {
        for (a, b) in counts.iter_mut().zip(c?) {
            *a += b;
        }
    }
    let total: u64 = counts.iter().sum();
    let probs: Vec<f64> = (0..=k).map(|n| poisson_midpoint_pmf(k, n)).collect::<Result<_, _>>()?;

    let mut table = Table::new("counts", &["count", "observed", "expected"]);
    for (n, (&c, &pr)) in counts.iter().zip(&probs).enumerate() {
        table.push(vec![n.into(), c.into(), (pr * total as f64).into()]);
    }
    report.tables.push(table);

    let chi = chi_square_test(&counts, &probs)?;
    report.estimate("chi_square_statistic", chi.statistic, (2.0 * chi.dof as f64).sqrt());
    report.verdict(
        Verdict::new(format!("activation counts follow Binomial({k}, 1/{k}) (χ² p > 0.001)"), REFERENCE)
            .holds(chi.p_value, Some(0.001), chi.p_value > 0.001)
            .note(format!("χ² = {:.3}, dof = {}", chi.statistic, chi.dof)),
    );

    let n = total as f64;
    let p0 = counts[0] as f64 / n;
    let p0_se = (p0 * (1.0 - p0) / n).sqrt();
    report.estimate("p_count_0", p0, p0_se);
    report.verdict(
        Verdict::new("P(count = 0) matches the binomial pmf", REFERENCE).agrees(p0, p0_se, probs[0], p.z),
    );
    let mean = MeanEstimate::from_iter(
        counts
            .iter()
            .enumerate()
            .flat_map(|(c, &times)| std::iter::repeat_n(c as f64, times as usize)),
    )?;
    report.estimate("mean_count", mean.mean, mean.se);
    report.verdict(Verdict::new("mean activation count is 1", REFERENCE).agrees(mean.mean, mean.se, 1.0, p.z));

    let mut tv = Table::new("poisson_tv", &["k", "tv"]);
    for &kk in &p.k_grid {
        tv.push(vec![kk.into(), midpoint_poisson_tv(kk)?.into()]);
    }
    report.tables.push(tv);
    let tv100 = midpoint_poisson_tv(100)?;
    report.verdict(
        Verdict::new("TV(Binomial(100, 1/100), Poisson(1)) < 0.01", REFERENCE).holds(tv100, Some(0.01), tv100 < 0.01),
    );
    Ok(())
}
