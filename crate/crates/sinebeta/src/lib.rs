//! Simulation and statistical verification toolkit for the Sine_beta point
//! process at small inverse temperature.
//!
//! The Sine_beta process is the bulk scaling limit of beta-ensemble
//! eigenvalues. Its counting function is characterised by a family of coupled
//! diffusions (the stochastic sine equations) driven by one shared complex
//! Brownian motion; counts in `[lambda, lambda']` are the winding numbers
//! `(alpha_{lambda'}(inf) - alpha_lambda(inf)) / 2pi`. As `beta -> 0` the
//! process crosses over to a Poisson point process with intensity
//! `dlambda / 2pi`.
//!
//! The crate is organised around that picture:
//!
//! * [`sinesde`] integrates the coupled family with shared two-dimensional
//!   noise and emits jump ledgers (winding events of each level and
//!   difference process).
//! * [`welltime`] handles the stationary exit-time problem: the potential
//!   `V_beta`, its critical points, log-domain quadrature for the expected
//!   exit time, the Laplace-transform fixed point, and Monte Carlo
//!   first-passage sampling of the stationary angle diffusion.
//! * [`ppstats`] turns ledgers into point-process samples and runs
//!   goodness-of-fit, independence and coupling diagnostics.
//! * [`harness`] is the CLI-facing layer: configuration, deterministic
//!   seeding, parallel execution and persistence of samples and reports.
//!
//! Numeric kernels are generic over the scalar type via [`scalar::Scalar`];
//! the harness and statistics run on [`Real`].

pub mod harness;
pub mod ppstats;
pub mod rng;
pub mod scalar;
pub mod sinesde;
pub mod welltime;

pub use scalar::Scalar;

/// Scalar type used by the harness and all shipped binaries.
pub type Real = f64;

/// Model parameters instantiated at the default scalar type.
pub type ModelParams = sinesde::ModelParams<Real>;
/// Integrator settings instantiated at the default scalar type.
pub type IntegratorSettings = sinesde::IntegratorSettings<Real>;
/// Jump ledger instantiated at the default scalar type.
pub type JumpLedger = sinesde::JumpLedger<Real>;
/// Stationary well specification at the default scalar type.
pub type WellSpec = welltime::WellSpec<Real>;
/// Quadrature settings at the default scalar type.
pub type QuadratureSettings = welltime::QuadratureSettings<Real>;
