//! Point-process statistics over jump ledgers.
//!
//! Counts in `[lambda, lambda']` are endpoint winding numbers of difference
//! processes; rescaled jump times form empirical measures whose small-beta
//! limits are inhomogeneous Poisson processes. This module turns ledgers
//! into samples and runs the goodness-of-fit, independence and coupling
//! diagnostics the verification suites are built from.

mod coupling;
pub mod dist;
mod gof;
mod measure;
mod report;

pub use coupling::{
    coupling_diagnostics, fast_reach_probe, fast_reach_probe_from, CouplingDiagnostics,
};
pub use gof::{independence_test, ks_exponential, poisson_gof};
pub use measure::{counts_for_intervals, rescale_ledger, rescale_process, CountTable, Interval};
pub use report::{Reference, TestReport};

use thiserror::Error;

/// Failures from statistical operations.
#[derive(Debug, Error)]
pub enum StatsError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("configuration error: {0}")]
    Config(String),
}
