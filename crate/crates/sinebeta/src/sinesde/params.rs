//! Model parameters and integrator settings.

use crate::scalar::{lit, Scalar};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Validation failures for model or integrator parameters.
#[derive(Debug, Error)]
pub enum ParamError {
    #[error("beta must be positive and finite, got {0}")]
    InvalidBeta(f64),
    #[error("lambdas must be a non-empty, strictly ascending list of nonnegative reals: {0}")]
    InvalidLambdas(String),
    #[error("step must satisfy 0 < h <= 0.05 (diffusion coefficient is bounded by 2), got {0}")]
    InvalidStep(f64),
    #[error("horizon_rescaled must be >= 3 so the residual intensity factor e^(-2 pi T) is negligible, got {0}")]
    InvalidHorizon(f64),
    #[error("settle_band must lie in (0, pi), got {0}")]
    InvalidSettleBand(f64),
    #[error("tracked pair ({0}, {1}) refers to a missing lambda index (grid size {2})")]
    InvalidPair(usize, usize, usize),
}

/// Inverse temperature and the ascending grid of angular speeds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelParams<S> {
    beta: S,
    lambdas: Vec<S>,
}

impl<S: Scalar> ModelParams<S> {
    /// Validates `beta > 0` and a strictly ascending, nonnegative grid.
    /// Betas outside the recommended operating range `(0, 4]` are accepted
    /// with a warning.
    pub fn new(beta: S, lambdas: Vec<S>) -> Result<Self, ParamError> {
        if !(beta > S::zero()) || !beta.is_finite() {
            return Err(ParamError::InvalidBeta(beta.to_f64().unwrap_or(f64::NAN)));
        }
        if beta > lit::<S>(4.0) {
            log::warn!(
                "beta = {beta} is outside the recommended operating range (0, 4]; \
                 statistics far from the Poisson regime"
            );
        }
        if lambdas.is_empty() {
            return Err(ParamError::InvalidLambdas("empty grid".into()));
        }
        for (i, l) in lambdas.iter().enumerate() {
            if !l.is_finite() || *l < S::zero() {
                return Err(ParamError::InvalidLambdas(format!(
                    "lambda[{i}] = {l} (negative speeds are handled by translation at the harness level)"
                )));
            }
            if i > 0 && !(lambdas[i - 1] < *l) {
                return Err(ParamError::InvalidLambdas(format!(
                    "lambda[{}] = {} is not strictly above lambda[{}] = {}",
                    i,
                    l,
                    i - 1,
                    lambdas[i - 1]
                )));
            }
        }
        Ok(Self { beta, lambdas })
    }

    pub fn beta(&self) -> S {
        self.beta
    }

    pub fn lambdas(&self) -> &[S] {
        &self.lambdas
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }
}

/// Euler integration controls in physical time units.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntegratorSettings<S> {
    step: S,
    horizon_rescaled: S,
    settle_band: S,
}

impl<S: Scalar> IntegratorSettings<S> {
    /// `step` is the Euler step h, `horizon_rescaled` the horizon T in
    /// rescaled units (physical horizon is `8 pi T / beta`), `settle_band`
    /// the residue band classifying an endpoint as settled.
    pub fn new(step: S, horizon_rescaled: S, settle_band: S) -> Result<Self, ParamError> {
        if !(step > S::zero()) || step > lit::<S>(0.05) || !step.is_finite() {
            return Err(ParamError::InvalidStep(step.to_f64().unwrap_or(f64::NAN)));
        }
        if !(horizon_rescaled >= lit::<S>(3.0)) {
            return Err(ParamError::InvalidHorizon(
                horizon_rescaled.to_f64().unwrap_or(f64::NAN),
            ));
        }
        if !(settle_band > S::zero()) || !(settle_band < S::PI()) {
            return Err(ParamError::InvalidSettleBand(
                settle_band.to_f64().unwrap_or(f64::NAN),
            ));
        }
        Ok(Self {
            step,
            horizon_rescaled,
            settle_band,
        })
    }

    pub fn step(&self) -> S {
        self.step
    }

    pub fn horizon_rescaled(&self) -> S {
        self.horizon_rescaled
    }

    pub fn settle_band(&self) -> S {
        self.settle_band
    }

    /// Physical horizon `8 pi T / beta`.
    pub fn horizon_physical(&self, beta: S) -> S {
        lit::<S>(8.0) * S::PI() * self.horizon_rescaled / beta
    }

    /// Number of full Euler steps covering the physical horizon.
    pub fn steps(&self, beta: S) -> u64 {
        (self.horizon_physical(beta) / self.step)
            .round()
            .to_u64()
            .expect("step count fits in u64")
    }
}

impl<S: Scalar> Default for IntegratorSettings<S> {
    fn default() -> Self {
        Self {
            step: lit(0.01),
            horizon_rescaled: lit(3.0),
            settle_band: lit(0.1),
        }
    }
}

/// A tracked difference process `alpha_{lambda_hi} - alpha_{lambda_lo}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TrackedPair {
    pub lo: usize,
    pub hi: usize,
}

impl TrackedPair {
    pub fn new(lo: usize, hi: usize) -> Self {
        Self { lo, hi }
    }

    pub fn validate(&self, grid_len: usize) -> Result<(), ParamError> {
        if self.lo >= grid_len || self.hi >= grid_len || self.lo > self.hi {
            return Err(ParamError::InvalidPair(self.lo, self.hi, grid_len));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_params() {
        assert!(ModelParams::new(0.0, vec![1.0]).is_err());
        assert!(ModelParams::new(-1.0, vec![1.0]).is_err());
        assert!(ModelParams::new(1.0, vec![]).is_err());
        assert!(ModelParams::new(1.0, vec![1.0, 1.0]).is_err());
        assert!(ModelParams::new(1.0, vec![2.0, 1.0]).is_err());
        assert!(ModelParams::new(1.0, vec![-1.0, 1.0]).is_err());
        assert!(ModelParams::new(0.5, vec![0.0, 1.0, 2.0]).is_ok());
    }

    #[test]
    fn rejects_bad_settings() {
        assert!(IntegratorSettings::new(0.06, 3.0, 0.1).is_err());
        assert!(IntegratorSettings::new(0.0, 3.0, 0.1).is_err());
        assert!(IntegratorSettings::new(0.01, 2.0, 0.1).is_err());
        assert!(IntegratorSettings::new(0.01, 3.0, 0.0).is_err());
        assert!(IntegratorSettings::new(0.01, 3.0, 4.0).is_err());
        assert!(IntegratorSettings::new(0.01, 3.0, 0.1).is_ok());
    }

    #[test]
    fn horizon_and_steps() {
        let s = IntegratorSettings::new(0.01, 3.0, 0.1).unwrap();
        let h = s.horizon_physical(0.02f64);
        assert!((h - 8.0 * std::f64::consts::PI * 3.0 / 0.02).abs() < 1e-9);
        assert_eq!(s.steps(0.02), (h / 0.01).round() as u64);
    }
}
