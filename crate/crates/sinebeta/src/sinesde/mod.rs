//! Coupled stochastic sine equations.
//!
//! The family `alpha_lambda` solves
//!
//! ```text
//! d alpha = lambda (beta/4) e^{-beta t / 4} dt + (cos alpha - 1) dX + sin alpha dY
//! ```
//!
//! with one shared two-dimensional Brownian increment `(dX, dY)` across all
//! angular speeds `lambda`. Winding events (the floor of `alpha / 2pi`
//! increasing) are recorded in a [`JumpLedger`]; these are the atoms of the
//! point process under study.

mod integrate;
mod ledger;
mod params;

pub use integrate::{
    drift, mean_alpha, simulate_replicate, step_family, wrap_2pi, FamilyState, MeanCurve,
    NoiseIncrements, Replicate, SimError, StepObserver,
};
pub use ledger::{FamilySummary, JumpLedger, PairStepStats, ProcessId, ProcessLedger};
pub use params::{IntegratorSettings, ModelParams, ParamError, TrackedPair};
