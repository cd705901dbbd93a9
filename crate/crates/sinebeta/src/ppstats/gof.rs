//! Goodness-of-fit and independence tests.

use super::dist::{
    chi_square_p, chi_square_stat, ks_distance, ks_threshold_95, merge_cells, pearson_with_ci,
    poisson_pmf,
};
use super::measure::CountTable;
use super::report::{Reference, TestReport};
use super::StatsError;

/// Chi-square significance threshold shared by the suites.
pub const P_THRESHOLD: f64 = 0.01;
/// Total-variation threshold for the marginal Poisson check.
pub const TV_THRESHOLD: f64 = 0.06;
/// Correlation magnitude threshold for asymptotic independence.
pub const CORR_THRESHOLD: f64 = 0.1;
/// Void-probability factorization gap threshold.
pub const VOID_GAP_THRESHOLD: f64 = 0.05;

/// Chi-square goodness of fit of integer counts against a Poisson pmf with
/// the given mean, cells merged so every expected count is at least 5. Also
/// reports the total-variation distance between the empirical and target
/// pmfs. Requires at least 500 samples.
pub fn poisson_gof(samples: &[i64], mean: f64) -> Result<TestReport, StatsError> {
    if samples.len() < 500 {
        return Err(StatsError::Input(format!(
            "poisson_gof needs at least 500 samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|&s| s < 0) {
        return Err(StatsError::Input("counts must be nonnegative".into()));
    }
    let n = samples.len() as f64;
    let degenerate = samples.windows(2).all(|w| w[0] == w[1]);
    if degenerate {
        return Ok(TestReport::new(
            "poisson_gof",
            f64::INFINITY,
            Reference::Distribution(format!("poisson({mean})")),
            false,
        )
        .with_n(samples.len() as u64)
        .with_meta("diagnostic", "degenerate sample: a single repeated value"));
    }

    let kmax = *samples.iter().max().expect("non-empty") as usize;
    let mut observed = vec![0.0; kmax + 2];
    for &s in samples {
        observed[s as usize] += 1.0;
    }
    // expected counts for k = 0..kmax plus the lumped upper tail
    let mut expected: Vec<f64> = (0..=kmax as u64).map(|k| n * poisson_pmf(k, mean)).collect();
    let tail = (n - expected.iter().sum::<f64>()).max(0.0);
    expected.push(tail);

    let (obs_m, exp_m) = merge_cells(&observed, &expected, 5.0);
    let stat = chi_square_stat(&obs_m, &exp_m);
    let df = (obs_m.len().saturating_sub(1)) as f64;
    let p = chi_square_p(stat, df);

    // TV distance: (1/2) sum_k |hat p_k - p_k| including the unobserved tail
    let mut tv = 0.0;
    for k in 0..=kmax as u64 {
        tv += (observed[k as usize] / n - poisson_pmf(k, mean)).abs();
    }
    tv += tail / n;
    tv *= 0.5;

    let pass = p > P_THRESHOLD && tv < TV_THRESHOLD;
    Ok(TestReport::new(
        "poisson_gof",
        stat,
        Reference::Distribution(format!("poisson({mean})")),
        pass,
    )
    .with_p(p)
    .with_n(samples.len() as u64)
    .with_meta("tv_distance", tv)
    .with_meta("tv_threshold", TV_THRESHOLD)
    .with_meta("p_threshold", P_THRESHOLD)
    .with_meta("cells", obs_m.len() as u64)
    .with_meta("mean", mean))
}

/// One-sample Kolmogorov-Smirnov distance to the unit exponential with the
/// standard asymptotic 95% threshold `1.36/sqrt(n)`. Requires at least 200
/// strictly positive samples.
pub fn ks_exponential(sample: &[f64]) -> Result<TestReport, StatsError> {
    if sample.len() < 200 {
        return Err(StatsError::Input(format!(
            "ks_exponential needs at least 200 samples, got {}",
            sample.len()
        )));
    }
    if sample.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(StatsError::Input(
            "ks_exponential requires strictly positive finite samples".into(),
        ));
    }
    let mut sorted = sample.to_vec();
    let d = ks_distance(&mut sorted, |x| 1.0 - (-x).exp());
    let threshold = ks_threshold_95(sample.len());
    Ok(TestReport::new(
        "ks_exponential",
        d,
        Reference::Value(threshold),
        d < threshold,
    )
    .with_n(sample.len() as u64)
    .with_meta("distribution", "exp(1)"))
}

/// Three-pronged independence check of the counts in two disjoint intervals:
/// Pearson correlation with CI, void-probability factorization gap, and a
/// contingency chi-square with cells merged to expected >= 5.
pub fn independence_test(
    table: &CountTable,
    i: usize,
    j: usize,
) -> Result<TestReport, StatsError> {
    if i >= table.intervals.len() || j >= table.intervals.len() || i == j {
        return Err(StatsError::Config(format!(
            "interval ids ({i}, {j}) out of range or equal"
        )));
    }
    if !table.intervals[i].disjoint_from(&table.intervals[j]) {
        return Err(StatsError::Config(format!(
            "intervals {:?} and {:?} overlap",
            (table.intervals[i].lo, table.intervals[i].hi),
            (table.intervals[j].lo, table.intervals[j].hi),
        )));
    }
    if table.rows.len() < 1000 {
        return Err(StatsError::Input(format!(
            "independence_test needs at least 1000 replicates, got {}",
            table.rows.len()
        )));
    }

    let a = table.column(i);
    let b = table.column(j);
    let n = a.len() as f64;
    let af: Vec<f64> = a.iter().map(|&v| v as f64).collect();
    let bf: Vec<f64> = b.iter().map(|&v| v as f64).collect();
    let (corr, ci_lo, ci_hi) = pearson_with_ci(&af, &bf);

    let pa0 = a.iter().filter(|&&v| v == 0).count() as f64 / n;
    let pb0 = b.iter().filter(|&&v| v == 0).count() as f64 / n;
    let pab0 = a
        .iter()
        .zip(&b)
        .filter(|(&x, &y)| x == 0 && y == 0)
        .count() as f64
        / n;
    let gap = (pab0 - pa0 * pb0).abs();

    let (stat, df) = contingency_chi_square(&a, &b);
    let p = chi_square_p(stat, df);

    let pass = corr.abs() < CORR_THRESHOLD && gap < VOID_GAP_THRESHOLD && p > P_THRESHOLD;
    Ok(TestReport::new(
        "independence",
        stat,
        Reference::Distribution(format!("chi2(df={df})")),
        pass,
    )
    .with_p(p)
    .with_n(a.len() as u64)
    .with_meta("correlation", corr)
    .with_meta("correlation_ci", vec![ci_lo, ci_hi])
    .with_meta("correlation_threshold", CORR_THRESHOLD)
    .with_meta("void_gap", gap)
    .with_meta("void_gap_threshold", VOID_GAP_THRESHOLD)
    .with_meta("p_threshold", P_THRESHOLD))
}

/// Contingency chi-square over the joint count table; each margin's
/// categories are capped so every cell expectation reaches 5.
fn contingency_chi_square(a: &[i64], b: &[i64]) -> (f64, f64) {
    let n = a.len() as f64;
    // cap categories: counts >= cap pooled, cap chosen so that the smallest
    // marginal bucket keeps expected cells above 5
    let cap_for = |v: &[i64]| -> usize {
        let kmax = v.iter().copied().max().unwrap_or(0).max(0) as usize;
        let mut hist = vec![0usize; kmax + 1];
        for &x in v {
            hist[x.max(0) as usize] += 1;
        }
        let mut cap = kmax;
        loop {
            if cap == 0 {
                break;
            }
            let tail: usize = hist[cap..].iter().sum();
            if tail * tail >= (5.0 * n) as usize || tail >= v.len() {
                break;
            }
            cap -= 1;
        }
        cap
    };
    let ca = cap_for(a);
    let cb = cap_for(b);
    let ra = ca + 1;
    let rb = cb + 1;
    let mut joint = vec![0.0; ra * rb];
    let mut ma = vec![0.0; ra];
    let mut mb = vec![0.0; rb];
    for (&x, &y) in a.iter().zip(b) {
        let xi = (x.max(0) as usize).min(ca);
        let yi = (y.max(0) as usize).min(cb);
        joint[xi * rb + yi] += 1.0;
        ma[xi] += 1.0;
        mb[yi] += 1.0;
    }
    let mut stat = 0.0;
    for x in 0..ra {
        for y in 0..rb {
            let e = ma[x] * mb[y] / n;
            if e > 0.0 {
                let o = joint[x * rb + y];
                stat += (o - e) * (o - e) / e;
            }
        }
    }
    let df = ((ra - 1) * (rb - 1)) as f64;
    (stat, df.max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ppstats::measure::Interval;

    #[test]
    fn gof_rejects_small_or_negative_input() {
        assert!(poisson_gof(&[1; 100], 1.0).is_err());
        assert!(poisson_gof(&vec![-1; 600], 1.0).is_err());
    }

    #[test]
    fn gof_fails_all_zero_sample_against_mean_one() {
        let rep = poisson_gof(&vec![0; 600], 1.0).unwrap();
        assert!(!rep.pass);
        assert!(rep.metadata.contains_key("diagnostic"));
    }

    #[test]
    fn ks_rejects_bad_input() {
        assert!(ks_exponential(&[1.0; 50]).is_err());
        assert!(ks_exponential(&vec![0.0; 300]).is_err());
        assert!(ks_exponential(&vec![-0.5; 300]).is_err());
    }

    #[test]
    fn ks_fails_constant_sample() {
        let rep = ks_exponential(&vec![1.0; 300]).unwrap();
        assert!(!rep.pass);
        // constant sample carries mass e^{-1} away from the exponential cdf
        assert!(rep.statistic > 0.3);
    }

    fn table_from(cols: Vec<Vec<i64>>) -> CountTable {
        let n = cols[0].len();
        let intervals = vec![
            Interval { lo: 0.0, hi: 1.0, lo_idx: 0, hi_idx: 1 },
            Interval { lo: 2.0, hi: 3.0, lo_idx: 2, hi_idx: 3 },
        ];
        let rows = (0..n)
            .map(|r| (r as u64, cols.iter().map(|c| c[r]).collect()))
            .collect();
        CountTable {
            intervals,
            rows,
            excluded: vec![],
            total_replicates: n,
        }
    }

    #[test]
    fn independence_fails_duplicated_column() {
        let col: Vec<i64> = (0..1500).map(|i| (i % 3) as i64).collect();
        let table = table_from(vec![col.clone(), col]);
        let rep = independence_test(&table, 0, 1).unwrap();
        assert!(!rep.pass);
        let corr = rep.metadata["correlation"].as_f64().unwrap();
        assert!(corr > 0.99);
    }

    #[test]
    fn independence_rejects_overlapping_intervals() {
        let col: Vec<i64> = (0..1500).map(|i| (i % 3) as i64).collect();
        let mut table = table_from(vec![col.clone(), col]);
        table.intervals[1] = Interval { lo: 0.5, hi: 3.0, lo_idx: 0, hi_idx: 3 };
        assert!(independence_test(&table, 0, 1).is_err());
    }
}
