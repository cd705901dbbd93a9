//! Stationary exit-time analysis.
//!
//! When the slow drift envelope is frozen, the logarithmic coordinate of a
//! single angle diffuses in the potential
//!
//! ```text
//! V(r) = -1/2 ( lambda beta / 4 * sinh r + log cosh r )
//! ```
//!
//! whose shallow well (local minimum `a`, barrier top `b`, both negative)
//! traps the diffusion for a mean time `~ 8 pi / (beta lambda)`. This module
//! computes that exit time by deterministic log-domain quadrature, solves the
//! Laplace-transform fixed point, and samples first-passage times of the
//! stationary angle diffusion `theta` for Monte Carlo cross-checks.

mod laplace;
mod passage;
mod potential;
mod quadrature;

pub use laplace::{laplace_g, laplace_g_damped, LaplaceResult};
pub use passage::{default_theta0, sample_passage_times, PassageOptions, PassageSample};
pub use potential::{critical_points, potential, potential_deriv, CriticalPoints, WellSpec};
pub use quadrature::{expected_exit_time, QuadratureResult, QuadratureSettings};

use thiserror::Error;

/// Failures from the exit-time machinery.
#[derive(Debug, Error)]
pub enum WellError {
    #[error("invalid well parameters: {0}")]
    Param(String),
    #[error("degenerate well: beta*lambda/8 = {0} >= 1/4, the potential has no interior extrema")]
    DegenerateWell(f64),
    #[error("quadrature tolerance not reached within the evaluation budget (partial value {value}, est rel error {rel_err})")]
    ToleranceNotReached { value: f64, rel_err: f64 },
    #[error("fixed point did not converge within {iterations} iterations (last change {delta})")]
    NonConvergence { iterations: u32, delta: f64 },
    #[error("invalid input: {0}")]
    Input(String),
}
