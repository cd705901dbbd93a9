//! Rescaled empirical measures and interval count tables.

use super::StatsError;
use crate::sinesde::{JumpLedger, ModelParams, ProcessId, ProcessLedger, Replicate};
use crate::Real;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Jump times of one process with time rescaled by `beta / (8 pi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescaledMeasure {
    pub points: Vec<Real>,
    pub source: ProcessId,
}

impl RescaledMeasure {
    /// Number of points in `[0, t]` (rescaled time).
    pub fn count_up_to(&self, t: Real) -> usize {
        self.points.partition_point(|&x| x <= t)
    }
}

/// Rescale one process ledger: each physical jump time is multiplied by
/// `beta / (8 pi)`, order preserved.
pub fn rescale_process(ledger: &ProcessLedger<Real>, beta: Real) -> RescaledMeasure {
    let factor = beta / (8.0 * PI);
    RescaledMeasure {
        points: ledger.times.iter().map(|&t| t * factor).collect(),
        source: ledger.id,
    }
}

/// Rescale every tracked process of a replicate's ledger.
pub fn rescale_ledger(ledger: &JumpLedger<Real>, beta: Real) -> Vec<RescaledMeasure> {
    ledger
        .processes
        .iter()
        .map(|p| rescale_process(p, beta))
        .collect()
}

/// An interval `[lo, hi]` resolved onto the lambda grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: Real,
    pub hi: Real,
    pub lo_idx: usize,
    pub hi_idx: usize,
}

impl Interval {
    /// Resolve interval endpoints onto the grid (exact up to 1e-9 relative).
    pub fn resolve(
        lo: Real,
        hi: Real,
        params: &ModelParams<Real>,
    ) -> Result<Self, StatsError> {
        if lo > hi {
            return Err(StatsError::Config(format!(
                "interval [{lo}, {hi}] has lo > hi"
            )));
        }
        let find = |v: Real| -> Option<usize> {
            params
                .lambdas()
                .iter()
                .position(|&l| (l - v).abs() <= 1e-9 * (1.0 + v.abs()))
        };
        let lo_idx = find(lo).ok_or_else(|| {
            StatsError::Config(format!(
                "interval endpoint {lo} is not on the simulated lambda grid {:?}",
                params.lambdas()
            ))
        })?;
        let hi_idx = find(hi).ok_or_else(|| {
            StatsError::Config(format!(
                "interval endpoint {hi} is not on the simulated lambda grid {:?}",
                params.lambdas()
            ))
        })?;
        Ok(Self {
            lo,
            hi,
            lo_idx,
            hi_idx,
        })
    }

    /// Interiors do not overlap (sharing an endpoint is fine).
    pub fn disjoint_from(&self, other: &Interval) -> bool {
        self.hi <= other.lo || other.hi <= self.lo
    }
}

/// Per-replicate interval counts. Replicates with an unsettled or
/// ledger-disagreeing endpoint on any requested interval are excluded from
/// the rows and listed in `excluded`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CountTable {
    pub intervals: Vec<Interval>,
    /// (replicate id, counts per interval) for the retained replicates.
    pub rows: Vec<(u64, Vec<i64>)>,
    pub excluded: Vec<u64>,
    pub total_replicates: usize,
}

impl CountTable {
    pub fn column(&self, interval: usize) -> Vec<i64> {
        self.rows.iter().map(|(_, c)| c[interval]).collect()
    }

    pub fn unsettled_fraction(&self) -> f64 {
        if self.total_replicates == 0 {
            0.0
        } else {
            self.excluded.len() as f64 / self.total_replicates as f64
        }
    }
}

/// Build the count table: count = endpoint winding number of the difference
/// process of each interval, cross-checked against the ledger running count.
pub fn counts_for_intervals(
    replicates: &[Replicate<Real>],
    intervals: &[(Real, Real)],
    params: &ModelParams<Real>,
) -> Result<CountTable, StatsError> {
    let resolved: Vec<Interval> = intervals
        .iter()
        .map(|&(lo, hi)| Interval::resolve(lo, hi, params))
        .collect::<Result<_, _>>()?;

    let mut rows = Vec::with_capacity(replicates.len());
    let mut excluded = Vec::new();
    'rep: for rep in replicates {
        let mut counts = Vec::with_capacity(resolved.len());
        for iv in &resolved {
            if iv.lo_idx == iv.hi_idx {
                counts.push(0);
                continue;
            }
            let proc = rep
                .ledger
                .process(ProcessId::Difference(iv.lo_idx, iv.hi_idx))
                .ok_or_else(|| {
                    StatsError::Config(format!(
                        "difference process ({}, {}) was not tracked in the simulation",
                        iv.lo_idx, iv.hi_idx
                    ))
                })?;
            if proc.unsettled || proc.count_mismatch {
                excluded.push(rep.summary.replicate);
                continue 'rep;
            }
            counts.push(proc.endpoint_count);
        }
        rows.push((rep.summary.replicate, counts));
    }
    Ok(CountTable {
        intervals: resolved,
        rows,
        excluded,
        total_replicates: replicates.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sinesde::ProcessLedger;

    fn ledger(times: Vec<f64>) -> ProcessLedger<f64> {
        ProcessLedger {
            id: ProcessId::Level(0),
            lambda: 1.0,
            times,
            endpoint_count: 0,
            endpoint_residue: 0.0,
            unsettled: false,
            count_mismatch: false,
            floor_decrements: 0,
            double_jump: false,
        }
    }

    #[test]
    fn empty_ledger_gives_empty_measure() {
        let m = rescale_process(&ledger(vec![]), 0.02);
        assert!(m.points.is_empty());
    }

    #[test]
    fn rescale_sends_8pi_over_beta_to_one() {
        let beta = 0.02;
        let m = rescale_process(&ledger(vec![8.0 * PI / beta]), beta);
        assert!((m.points[0] - 1.0).abs() < 1e-12);
        assert_eq!(m.count_up_to(1.0 + 1e-9), 1);
        assert_eq!(m.count_up_to(0.999), 0);
    }

    #[test]
    fn interval_resolution_errors_off_grid() {
        let params = ModelParams::new(0.1, vec![0.0, 1.0, 2.0]).unwrap();
        assert!(Interval::resolve(0.0, 1.0, &params).is_ok());
        assert!(Interval::resolve(0.0, 1.5, &params).is_err());
        assert!(Interval::resolve(2.0, 1.0, &params).is_err());
    }

    #[test]
    fn disjointness_allows_shared_endpoint() {
        let params = ModelParams::new(0.1, vec![0.0, 1.0, 2.0]).unwrap();
        let a = Interval::resolve(0.0, 1.0, &params).unwrap();
        let b = Interval::resolve(1.0, 2.0, &params).unwrap();
        assert!(a.disjoint_from(&b));
        let c = Interval::resolve(0.0, 2.0, &params).unwrap();
        assert!(!a.disjoint_from(&c));
    }
}
