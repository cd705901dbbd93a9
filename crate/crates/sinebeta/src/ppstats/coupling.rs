//! Coupling diagnostics and the fast-reach probe.
//!
//! These quantify, at finite beta, the mechanisms behind asymptotic
//! independence: the time the higher-speed angle spends below the lower one
//! (mod 2 pi), the time the lower angle spends away from 0 (mod 2 pi), how
//! reliably every low-speed jump is shadowed by a high-speed jump, and how
//! rarely the level and difference processes jump together.

use super::report::{Reference, TestReport};
use super::StatsError;
use crate::rng::{self, DOMAIN_REACH};
use crate::sinesde::{drift, ProcessId, Replicate, TrackedPair};
use crate::Real;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Step- and jump-level coupling fractions, all in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingDiagnostics {
    /// Fraction of steps with `wrap(alpha_hi) < wrap(alpha_lo)` (strict).
    pub theta_hat: f64,
    /// Fraction of steps with `wrap(alpha_lo) >= 4 atan(beta^{1/4})`.
    pub xi_hat: f64,
    /// Share of low-speed jumps matched by a high-speed jump within the window.
    pub inclusion_fraction: f64,
    /// Share of low-speed jumps with a difference-process jump within the window.
    pub simultaneity_fraction: f64,
    /// Total low-speed jumps over all replicates.
    pub lower_jumps: u64,
    /// Total steps over all replicates.
    pub steps: u64,
}

/// Any `|a - b| <= w` match between a sorted list and a query point.
fn has_match(sorted: &[Real], t: Real, w: Real) -> bool {
    let idx = sorted.partition_point(|&x| x < t - w);
    idx < sorted.len() && sorted[idx] <= t + w
}

/// Default jump-matching window: `9 log(1/beta)` physical time units, the
/// fast-reach scale.
pub fn default_window(beta: Real) -> Real {
    9.0 * (1.0 / beta).ln()
}

/// Compute the four coupling fractions for one tracked pair over all
/// replicates. `window` is in physical time units.
pub fn coupling_diagnostics(
    replicates: &[Replicate<Real>],
    pair: TrackedPair,
    window: Real,
) -> Result<CouplingDiagnostics, StatsError> {
    if replicates.is_empty() {
        return Err(StatsError::Input("no replicates".into()));
    }
    let mut below = 0u64;
    let mut away = 0u64;
    let mut steps = 0u64;
    let mut lower_jumps = 0u64;
    let mut included = 0u64;
    let mut simultaneous = 0u64;

    for rep in replicates {
        let slot = rep
            .ledger
            .processes
            .iter()
            .filter_map(|p| match p.id {
                ProcessId::Difference(lo, hi) => Some((lo, hi)),
                _ => None,
            })
            .position(|(lo, hi)| lo == pair.lo && hi == pair.hi)
            .ok_or_else(|| {
                StatsError::Config(format!(
                    "pair ({}, {}) was not tracked in the simulation",
                    pair.lo, pair.hi
                ))
            })?;
        let stats = &rep.summary.pair_stats[slot];
        below += stats.below_steps;
        away += stats.lower_away_steps;
        steps += rep.summary.steps;

        let lo_times = &rep
            .ledger
            .process(ProcessId::Level(pair.lo))
            .expect("level process is always tracked")
            .times;
        let hi_times = &rep
            .ledger
            .process(ProcessId::Level(pair.hi))
            .expect("level process is always tracked")
            .times;
        let diff_times = &rep
            .ledger
            .process(ProcessId::Difference(pair.lo, pair.hi))
            .expect("slot checked above")
            .times;
        lower_jumps += lo_times.len() as u64;
        for &t in lo_times {
            if has_match(hi_times, t, window) {
                included += 1;
            }
            if has_match(diff_times, t, window) {
                simultaneous += 1;
            }
        }
    }

    let frac = |num: u64, den: u64, empty: f64| {
        if den == 0 {
            empty
        } else {
            num as f64 / den as f64
        }
    };
    Ok(CouplingDiagnostics {
        theta_hat: frac(below, steps, 0.0),
        xi_hat: frac(away, steps, 0.0),
        inclusion_fraction: frac(included, lower_jumps, 1.0),
        simultaneity_fraction: frac(simultaneous, lower_jumps, 0.0),
        lower_jumps,
        steps,
    })
}

/// Probability that a single angle started at `2 pi - 4 atan(beta^eps)` (mod
/// 2 pi) completes the winding within `9 log(1/beta)` physical time.
pub fn fast_reach_probe(
    beta: Real,
    lambda: Real,
    epsilon: Real,
    n: usize,
    master_seed: u64,
) -> Result<TestReport, StatsError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(StatsError::Input(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let alpha0 = TAU - 4.0 * beta.powf(epsilon).atan();
    fast_reach_probe_from(alpha0, beta, lambda, n, master_seed)
        .map(|rep| rep.with_meta("epsilon", epsilon))
}

/// Same probe from an explicit starting angle in `(0, 2 pi]`.
pub fn fast_reach_probe_from(
    alpha0: Real,
    beta: Real,
    lambda: Real,
    n: usize,
    master_seed: u64,
) -> Result<TestReport, StatsError> {
    if !(beta > 0.0) || !(lambda > 0.0) || n == 0 {
        return Err(StatsError::Input(
            "need beta > 0, lambda > 0 and n > 0".into(),
        ));
    }
    let window = default_window(beta);
    let h = 0.01;
    let steps = (window / h).ceil() as u64;
    let sqrt_h = h.sqrt();

    let hits: u64 = (0..n as u64)
        .into_par_iter()
        .map(|path| {
            if alpha0 >= TAU {
                return 1u64; // reach time 0
            }
            let mut rng = rng::substream(master_seed, DOMAIN_REACH, path);
            let mut alpha = alpha0;
            let mut t = 0.0;
            for _ in 0..steps {
                let z1: f64 = StandardNormal.sample(&mut rng);
                let z2: f64 = StandardNormal.sample(&mut rng);
                let (sin_a, cos_a) = alpha.sin_cos();
                alpha += drift(lambda, beta, t) * h
                    + (cos_a - 1.0) * z1 * sqrt_h
                    + sin_a * z2 * sqrt_h;
                t += h;
                if alpha >= TAU {
                    return 1;
                }
            }
            0
        })
        .sum();

    let p_hat = hits as f64 / n as f64;
    // Wilson 95% interval
    let z = 1.959964;
    let nf = n as f64;
    let denom = 1.0 + z * z / nf;
    let center = (p_hat + z * z / (2.0 * nf)) / denom;
    let half = z * ((p_hat * (1.0 - p_hat) + z * z / (4.0 * nf)) / nf).sqrt() / denom;

    const REACH_TARGET: f64 = 0.95; // finite-beta calibration of the 1 - beta^c bound
    Ok(
        TestReport::new("fast_reach", p_hat, Reference::Value(REACH_TARGET), p_hat >= REACH_TARGET)
            .with_n(n as u64)
            .with_meta("ci", vec![center - half, center + half])
            .with_meta("window_physical", window)
            .with_meta("beta", beta)
            .with_meta("lambda", lambda),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn match_window_lookup() {
        let times = vec![1.0, 5.0, 9.0];
        assert!(has_match(&times, 4.5, 0.6));
        assert!(!has_match(&times, 3.0, 0.5));
        assert!(has_match(&times, 0.5, 0.5));
        assert!(!has_match(&[], 1.0, 10.0));
    }

    #[test]
    fn probe_validates_epsilon() {
        assert!(fast_reach_probe(0.05, 1.0, 0.0, 10, 1).is_err());
        assert!(fast_reach_probe(0.05, 1.0, 1.0, 10, 1).is_err());
    }

    #[test]
    fn start_exactly_at_barrier_reaches_immediately() {
        let rep = fast_reach_probe_from(TAU, 0.05, 1.0, 50, 1).unwrap();
        assert_eq!(rep.statistic, 1.0);
        assert!(rep.pass);
    }
}
