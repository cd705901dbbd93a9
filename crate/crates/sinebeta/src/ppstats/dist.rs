//! Shared distributional helpers for the statistical tests.

use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::gamma::ln_gamma;

/// Upper-tail p-value of a chi-square statistic with `df` degrees of freedom.
pub fn chi_square_p(stat: f64, df: f64) -> f64 {
    if df <= 0.0 {
        return 1.0;
    }
    let dist = ChiSquared::new(df).expect("positive degrees of freedom");
    (1.0 - dist.cdf(stat)).clamp(0.0, 1.0)
}

/// Poisson pmf evaluated stably through logs.
pub fn poisson_pmf(k: u64, mean: f64) -> f64 {
    if mean <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (k as f64 * mean.ln() - mean - ln_gamma(k as f64 + 1.0)).exp()
}

/// Merge adjacent cells (left to right) so every expected count reaches
/// `min_expected`; the final cell absorbs any shortfall at the tail.
/// Returns (observed, expected) per merged cell.
pub fn merge_cells(observed: &[f64], expected: &[f64], min_expected: f64) -> (Vec<f64>, Vec<f64>) {
    let mut obs = Vec::new();
    let mut exp = Vec::new();
    let mut acc_o = 0.0;
    let mut acc_e = 0.0;
    for (&o, &e) in observed.iter().zip(expected) {
        acc_o += o;
        acc_e += e;
        if acc_e >= min_expected {
            obs.push(acc_o);
            exp.push(acc_e);
            acc_o = 0.0;
            acc_e = 0.0;
        }
    }
    if acc_e > 0.0 || acc_o > 0.0 {
        if let (Some(last_o), Some(last_e)) = (obs.last_mut(), exp.last_mut()) {
            *last_o += acc_o;
            *last_e += acc_e;
        } else {
            obs.push(acc_o);
            exp.push(acc_e);
        }
    }
    (obs, exp)
}

/// Pearson chi-square statistic over merged cells.
pub fn chi_square_stat(observed: &[f64], expected: &[f64]) -> f64 {
    observed
        .iter()
        .zip(expected)
        .filter(|(_, &e)| e > 0.0)
        .map(|(&o, &e)| (o - e) * (o - e) / e)
        .sum()
}

/// One-sample Kolmogorov-Smirnov distance of `sample` to the cdf `f`.
/// The sample is sorted in place.
pub fn ks_distance(sample: &mut [f64], f: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(|a, b| a.partial_cmp(b).expect("finite sample"));
    let n = sample.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sample.iter().enumerate() {
        let c = f(x);
        d = d.max((c - i as f64 / n).abs());
        d = d.max(((i as f64 + 1.0) / n - c).abs());
    }
    d
}

/// Asymptotic 95% KS acceptance threshold `1.36 / sqrt(n)`.
pub fn ks_threshold_95(n: usize) -> f64 {
    1.36 / (n as f64).sqrt()
}

/// Pearson correlation with a 95% Fisher-z confidence interval.
/// Returns `(r, lo, hi)`.
pub fn pearson_with_ci(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
        sxy += (a - mx) * (b - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        // a constant margin carries no correlation information
        return (0.0, -1.0, 1.0);
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    if n <= 3.0 || r.abs() >= 1.0 {
        return (r, -1.0, 1.0);
    }
    let z = 0.5 * ((1.0 + r) / (1.0 - r)).ln();
    let se = 1.0 / (n - 3.0).sqrt();
    let (zl, zh) = (z - 1.959964 * se, z + 1.959964 * se);
    (r, zl.tanh(), zh.tanh())
}

/// Two-sample chi-square that the two count samples share one law.
/// Returns `(statistic, df, p)`; cells merged so pooled expected >= 5.
pub fn two_sample_chi_square(a: &[i64], b: &[i64]) -> (f64, f64, f64) {
    let kmax = a
        .iter()
        .chain(b)
        .copied()
        .max()
        .unwrap_or(0)
        .max(0) as usize;
    let mut ha = vec![0.0; kmax + 1];
    let mut hb = vec![0.0; kmax + 1];
    for &v in a {
        ha[v.max(0) as usize] += 1.0;
    }
    for &v in b {
        hb[v.max(0) as usize] += 1.0;
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let pooled: Vec<f64> = ha.iter().zip(&hb).map(|(&x, &y)| x + y).collect();
    // merge on pooled expectation, applying identical merges to both samples
    let mut cells: Vec<(f64, f64, f64)> = Vec::new(); // (a, b, pooled)
    let (mut ca, mut cb, mut cp) = (0.0, 0.0, 0.0);
    for k in 0..=kmax {
        ca += ha[k];
        cb += hb[k];
        cp += pooled[k];
        if cp * na / (na + nb) >= 5.0 && cp * nb / (na + nb) >= 5.0 {
            cells.push((ca, cb, cp));
            ca = 0.0;
            cb = 0.0;
            cp = 0.0;
        }
    }
    if cp > 0.0 {
        if let Some(last) = cells.last_mut() {
            last.0 += ca;
            last.1 += cb;
            last.2 += cp;
        } else {
            cells.push((ca, cb, cp));
        }
    }
    let total = na + nb;
    let mut stat = 0.0;
    for &(oa, ob, p) in &cells {
        let ea = p * na / total;
        let eb = p * nb / total;
        if ea > 0.0 {
            stat += (oa - ea) * (oa - ea) / ea;
        }
        if eb > 0.0 {
            stat += (ob - eb) * (ob - eb) / eb;
        }
    }
    let df = (cells.len().saturating_sub(1)) as f64;
    (stat, df, chi_square_p(stat, df))
}
