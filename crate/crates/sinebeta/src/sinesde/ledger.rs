//! Jump ledgers and per-replicate summaries.

use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

/// Identity of a tracked winding process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProcessId {
    /// Level process `alpha_{lambda_i}`.
    Level(usize),
    /// Difference process `alpha_{lambda_hi} - alpha_{lambda_lo}`.
    Difference(usize, usize),
}

impl ProcessId {
    pub fn kind(&self) -> &'static str {
        match self {
            ProcessId::Level(_) => "level",
            ProcessId::Difference(_, _) => "difference",
        }
    }
}

/// Ordered winding events of one process over one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessLedger<S> {
    pub id: ProcessId,
    /// Angular speed of the process (difference of speeds for a pair).
    pub lambda: S,
    /// Physical jump times, non-decreasing. A floor increase of two in one
    /// step is recorded as two entries at the same midpoint time and flags
    /// `double_jump`.
    pub times: Vec<S>,
    /// Endpoint count: nearest multiple of 2 pi at the horizon.
    pub endpoint_count: i64,
    /// Endpoint residue `wrap_2pi(p(T))`.
    pub endpoint_residue: S,
    /// Residue fell inside `[settle_band, 2 pi - settle_band]`.
    pub unsettled: bool,
    /// Endpoint count disagrees with the ledger running-max count.
    pub count_mismatch: bool,
    /// Raw floor decrements observed (discretization wiggle across a barrier).
    pub floor_decrements: u64,
    /// A single step advanced the floor by two or more.
    pub double_jump: bool,
}

impl<S: Scalar> ProcessLedger<S> {
    /// Running count after the last recorded jump.
    pub fn count(&self) -> u64 {
        self.times.len() as u64
    }
}

/// All tracked processes of one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpLedger<S> {
    pub processes: Vec<ProcessLedger<S>>,
}

impl<S: Scalar> JumpLedger<S> {
    pub fn process(&self, id: ProcessId) -> Option<&ProcessLedger<S>> {
        self.processes.iter().find(|p| p.id == id)
    }
}

/// Step-level ordering statistics for one tracked pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairStepStats {
    /// Steps with `wrap(alpha_hi) < wrap(alpha_lo)` (strict).
    pub below_steps: u64,
    /// Steps with `wrap(alpha_lo) >= 4 atan(beta^{1/4})`.
    pub lower_away_steps: u64,
}

/// Trajectory-level summary of one replicate (the family path distilled to
/// what the statistics consume).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySummary<S> {
    pub replicate: u64,
    pub steps: u64,
    pub final_time: S,
    pub final_alphas: Vec<S>,
    /// Adjacent-pair monotone-coupling violations over all steps.
    pub order_violations: u64,
    /// Number of adjacent-pair comparisons performed.
    pub order_checks: u64,
    /// Per tracked pair, step-level ordering stats (same order as the
    /// requested pairs).
    pub pair_stats: Vec<PairStepStats>,
}

/// Jump tracker: running-max floor construction.
///
/// Counts never decrease; raw floor decrements are tallied separately so the
/// discretization budget can be checked.
#[derive(Debug, Clone)]
pub(crate) struct JumpTracker<S> {
    floor_max: i64,
    prev_floor: i64,
    times: Vec<S>,
    decrements: u64,
    double_jump: bool,
}

impl<S: Scalar> JumpTracker<S> {
    pub fn new() -> Self {
        Self {
            floor_max: 0,
            prev_floor: 0,
            times: Vec::new(),
            decrements: 0,
            double_jump: false,
        }
    }

    #[inline]
    pub fn update(&mut self, value: S, t_mid: S) {
        let fl = value
            .div(S::TAU())
            .floor()
            .to_i64()
            .expect("floor of finite alpha fits in i64");
        if fl < self.prev_floor {
            self.decrements += 1;
        }
        if fl > self.floor_max {
            if fl - self.floor_max >= 2 {
                self.double_jump = true;
            }
            while self.floor_max < fl {
                self.floor_max += 1;
                self.times.push(t_mid);
            }
        }
        self.prev_floor = fl;
    }

    pub fn finish(
        self,
        id: ProcessId,
        lambda: S,
        endpoint_value: S,
        settle_band: S,
    ) -> ProcessLedger<S> {
        let residue = super::wrap_2pi(endpoint_value);
        let endpoint_count = (endpoint_value / S::TAU())
            .round()
            .to_i64()
            .expect("endpoint count fits in i64");
        let unsettled = residue >= settle_band && residue <= S::TAU() - settle_band;
        let count_mismatch = endpoint_count != self.times.len() as i64;
        ProcessLedger {
            id,
            lambda,
            times: self.times,
            endpoint_count,
            endpoint_residue: residue,
            unsettled,
            count_mismatch,
            floor_decrements: self.decrements,
            double_jump: self.double_jump,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn running_max_never_decrements_count() {
        let mut tr = JumpTracker::<f64>::new();
        tr.update(0.5, 0.1);
        tr.update(TAU + 0.1, 0.2); // jump to floor 1
        tr.update(TAU - 0.1, 0.3); // dips back: decrement tallied, count kept
        tr.update(2.0 * TAU + 0.1, 0.4); // floor 2
        let ledger = tr.finish(ProcessId::Level(0), 1.0, 2.0 * TAU + 0.05, 0.1);
        assert_eq!(ledger.times, vec![0.2, 0.4]);
        assert_eq!(ledger.floor_decrements, 1);
        assert_eq!(ledger.endpoint_count, 2);
        assert!(!ledger.unsettled);
        assert!(!ledger.count_mismatch);
        assert!(!ledger.double_jump);
    }

    #[test]
    fn double_jump_records_two_entries_same_time() {
        let mut tr = JumpTracker::<f64>::new();
        tr.update(2.0 * TAU + 0.3, 0.7);
        let ledger = tr.finish(ProcessId::Level(0), 1.0, 2.0 * TAU + 0.3, 0.1);
        assert_eq!(ledger.times, vec![0.7, 0.7]);
        assert!(ledger.double_jump);
        assert!(ledger.unsettled); // residue 0.3 inside the band
    }

    #[test]
    fn endpoint_near_next_multiple_flags_mismatch() {
        let mut tr = JumpTracker::<f64>::new();
        tr.update(TAU - 0.01, 0.5); // never crossed
        let ledger = tr.finish(ProcessId::Level(0), 1.0, TAU - 0.01, 0.1);
        assert_eq!(ledger.count(), 0);
        assert_eq!(ledger.endpoint_count, 1); // nearest multiple
        assert!(ledger.count_mismatch);
        assert!(!ledger.unsettled); // residue within band of 2 pi
    }
}
