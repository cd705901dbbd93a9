//! First-passage sampling of the stationary angle diffusion.
//!
//! `theta` solves `d theta = lambda beta / 4 dt + 2 sin(theta / 2) dB`; the
//! passage time is the first hit of `2 pi`. Rescaled by
//! `beta lambda / (8 pi)` the passage law approaches a unit-mean exponential
//! as `beta -> 0`.

use super::potential::WellSpec;
use super::WellError;
use crate::rng::{self, DOMAIN_PASSAGE};
use crate::scalar::{lit, Scalar};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Euler controls for the passage sampler.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PassageOptions<S> {
    /// Euler step in physical time.
    pub step: S,
    /// Paths exceeding `censor_factor * 8 pi / (beta lambda)` without
    /// crossing are censored (must be rare: the exponential tail at 100
    /// mean lifetimes is ~ e^{-100}).
    pub censor_factor: S,
}

impl<S: Scalar> Default for PassageOptions<S> {
    fn default() -> Self {
        Self {
            step: lit(0.01),
            censor_factor: lit(100.0),
        }
    }
}

/// Raw and rescaled first-passage times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassageSample<S> {
    /// Physical passage times of the uncensored paths.
    pub raw_times: Vec<S>,
    /// `beta lambda / (8 pi)`.
    pub rescale: S,
    /// Paths that never crossed within the time cap.
    pub censored: u64,
    pub theta0: S,
}

impl<S: Scalar> PassageSample<S> {
    pub fn rescaled(&self) -> Vec<S> {
        self.raw_times.iter().map(|&t| t * self.rescale).collect()
    }

    pub fn mean_rescaled(&self) -> S {
        let n = S::from_usize(self.raw_times.len().max(1)).unwrap();
        self.rescaled().into_iter().fold(S::zero(), |a, b| a + b) / n
    }
}

/// Near-zero starting angle used throughout: `4 atan(beta^{1/4})`.
pub fn default_theta0<S: Scalar>(beta: S) -> S {
    lit::<S>(4.0) * beta.powf(lit::<S>(0.25)).atan()
}

/// Draw `n` independent passage times of `theta` from `theta0` to `2 pi`.
pub fn sample_passage_times<S: Scalar>(
    spec: &WellSpec<S>,
    theta0: S,
    n: usize,
    master_seed: u64,
    opts: &PassageOptions<S>,
) -> Result<PassageSample<S>, WellError>
where
    StandardNormal: Distribution<S>,
{
    if !(theta0 > S::zero()) || !(theta0 < S::TAU()) {
        return Err(WellError::Input(format!(
            "theta0 must lie in (0, 2 pi), got {theta0}"
        )));
    }
    if !(opts.step > S::zero()) || opts.step > lit::<S>(0.05) {
        return Err(WellError::Input(format!(
            "passage step must satisfy 0 < h <= 0.05, got {}",
            opts.step
        )));
    }
    let h = opts.step;
    let sqrt_h = h.sqrt();
    let drift = spec.lambda() * spec.beta() / lit::<S>(4.0) * h;
    let cap = opts.censor_factor * spec.exit_scale();
    let max_steps = (cap / h).ceil().to_u64().unwrap_or(u64::MAX);
    let half = lit::<S>(0.5);
    let two = lit::<S>(2.0);

    let outcomes: Vec<Option<S>> = (0..n as u64)
        .into_par_iter()
        .map(|path| {
            let mut rng = rng::substream(master_seed, DOMAIN_PASSAGE, path);
            let mut theta = theta0;
            if theta >= S::TAU() {
                return Some(S::zero());
            }
            for step in 0..max_steps {
                let z: S = StandardNormal.sample(&mut rng);
                theta = theta + drift + two * (theta * half).sin() * sqrt_h * z;
                if theta >= S::TAU() {
                    let t_mid = S::from_u64(step + 1).unwrap() * h - h * half;
                    return Some(t_mid);
                }
            }
            None
        })
        .collect();

    let mut raw_times = Vec::with_capacity(n);
    let mut censored = 0u64;
    for o in outcomes {
        match o {
            Some(t) => raw_times.push(t),
            None => censored += 1,
        }
    }
    if censored > 0 {
        log::warn!(
            "passage sampler censored {censored}/{n} paths at {} lifetimes",
            opts.censor_factor
        );
    }
    Ok(PassageSample {
        raw_times,
        rescale: spec.rescale(),
        censored,
        theta0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_theta0() {
        let spec = WellSpec::new(0.05, 1.0).unwrap();
        let opts = PassageOptions::default();
        assert!(sample_passage_times(&spec, 0.0, 10, 1, &opts).is_err());
        assert!(sample_passage_times(&spec, 7.0, 10, 1, &opts).is_err());
    }

    #[test]
    fn mean_rescaled_orders_of_magnitude() {
        // beta = 0.05, 80 paths: crude check that the rescaled mean is O(1)
        let spec = WellSpec::new(0.05, 1.0).unwrap();
        let opts = PassageOptions::default();
        let s =
            sample_passage_times(&spec, default_theta0(0.05), 80, 11, &opts).unwrap();
        assert_eq!(s.raw_times.len() as u64 + s.censored, 80);
        let m = s.mean_rescaled();
        assert!(m > 0.3 && m < 3.0, "mean rescaled = {m}");
        assert!(s.raw_times.iter().all(|&t| t > 0.0));
    }

    #[test]
    fn start_adjacent_to_barrier_concentrates_near_zero() {
        let spec = WellSpec::new(0.01, 1.0).unwrap();
        let opts = PassageOptions::default();
        let s = sample_passage_times(&spec, std::f64::consts::TAU - 1e-3, 200, 5, &opts).unwrap();
        assert_eq!(s.censored, 0);
        assert!(s.mean_rescaled() < 0.01, "mean = {}", s.mean_rescaled());
    }

    #[test]
    fn deterministic_given_seed() {
        let spec = WellSpec::new(0.05, 1.0).unwrap();
        let opts = PassageOptions::default();
        let a = sample_passage_times(&spec, 1.0, 20, 3, &opts).unwrap();
        let b = sample_passage_times(&spec, 1.0, 20, 3, &opts).unwrap();
        assert_eq!(a, b);
    }
}
