//! Euler integration of the coupled family and jump extraction.

use super::ledger::{FamilySummary, JumpLedger, JumpTracker, PairStepStats, ProcessId};
use super::params::{IntegratorSettings, ModelParams, ParamError, TrackedPair};
use crate::rng::{self, DOMAIN_REPLICATE};
use crate::scalar::{lit, Scalar};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Failures while integrating a replicate.
#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("replicate {replicate}: alpha[{process}] became non-finite at step {step} (step size too large?)")]
    NonFinite {
        replicate: u64,
        step: u64,
        process: usize,
    },
    #[error("need at least {need} replicates, got {got}")]
    TooFewReplicates { need: usize, got: usize },
}

/// Instantaneous family state: time and one angle per lambda.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyState<S> {
    pub t: S,
    pub alphas: Vec<S>,
}

impl<S: Scalar> FamilyState<S> {
    /// All angles start at zero.
    pub fn initial(params: &ModelParams<S>) -> Self {
        Self {
            t: S::zero(),
            alphas: vec![S::zero(); params.len()],
        }
    }
}

/// One shared two-dimensional Gaussian increment (real and imaginary parts
/// of `dZ`), each of variance h.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseIncrements<S> {
    pub dx: S,
    pub dy: S,
}

impl<S: Scalar> NoiseIncrements<S>
where
    StandardNormal: Distribution<S>,
{
    /// Draw `(dx, dy)` with variance h from `rng`.
    pub fn draw<R: rand::Rng + ?Sized>(rng: &mut R, h: S) -> Self {
        let sqrt_h = h.sqrt();
        let z1: S = StandardNormal.sample(rng);
        let z2: S = StandardNormal.sample(rng);
        Self {
            dx: z1 * sqrt_h,
            dy: z2 * sqrt_h,
        }
    }
}

/// Drift coefficient `lambda (beta/4) e^{-beta t / 4}`.
#[inline]
pub fn drift<S: Scalar>(lambda: S, beta: S, t: S) -> S {
    lambda * beta / lit::<S>(4.0) * (-beta * t / lit::<S>(4.0)).exp()
}

/// `x - 2 pi floor(x / 2 pi)`, in `[0, 2 pi)`.
#[inline]
pub fn wrap_2pi<S: Scalar>(x: S) -> S {
    x - S::TAU() * (x / S::TAU()).floor()
}

/// Shared-noise Euler increment of one angle, excluding the drift term.
#[inline(always)]
fn noise_increment<S: Scalar>(alpha: S, dx: S, dy: S) -> S {
    let (sin_a, cos_a) = alpha.sin_cos();
    (cos_a - S::one()) * dx + sin_a * dy
}

/// One Euler step of the whole family. Every angle consumes the same
/// `(dx, dy)`; that is the coupling.
pub fn step_family<S: Scalar>(
    state: &FamilyState<S>,
    noise: &NoiseIncrements<S>,
    params: &ModelParams<S>,
    h: S,
) -> Result<FamilyState<S>, SimError> {
    debug_assert_eq!(state.alphas.len(), params.len());
    let mut next = FamilyState {
        t: state.t + h,
        alphas: Vec::with_capacity(state.alphas.len()),
    };
    for (i, (&a, &lambda)) in state.alphas.iter().zip(params.lambdas()).enumerate() {
        let a_next =
            a + drift(lambda, params.beta(), state.t) * h + noise_increment(a, noise.dx, noise.dy);
        if !a_next.is_finite() {
            return Err(SimError::NonFinite {
                replicate: 0,
                step: 0,
                process: i,
            });
        }
        next.alphas.push(a_next);
    }
    Ok(next)
}

/// Per-step hook for consumers that need the trajectory (checkpoint
/// recording). The default does nothing.
pub trait StepObserver<S> {
    #[inline]
    fn observe(&mut self, _step: u64, _t: S, _alphas: &[S]) {}
}

/// No-op observer.
pub struct NoObserver;
impl<S> StepObserver<S> for NoObserver {}

/// One replicate's outputs: summary statistics plus the jump ledger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replicate<S> {
    pub summary: FamilySummary<S>,
    pub ledger: JumpLedger<S>,
}

/// Integrate one replicate from `alpha(0) = 0` to the physical horizon.
///
/// Jumps are recorded when the running max of `floor(p / 2pi)` increases,
/// timestamped at the step midpoint. Deterministic given
/// `(master_seed, replicate)`.
pub fn simulate_replicate<S: Scalar>(
    params: &ModelParams<S>,
    settings: &IntegratorSettings<S>,
    master_seed: u64,
    replicate: u64,
    tracked_pairs: &[TrackedPair],
) -> Result<Replicate<S>, SimError>
where
    StandardNormal: Distribution<S>,
{
    integrate_family(
        params,
        settings,
        master_seed,
        replicate,
        tracked_pairs,
        &mut NoObserver,
    )
}

/// Core integration loop; `observer` sees the state after every step.
pub(crate) fn integrate_family<S: Scalar, O: StepObserver<S>>(
    params: &ModelParams<S>,
    settings: &IntegratorSettings<S>,
    master_seed: u64,
    replicate: u64,
    tracked_pairs: &[TrackedPair],
    observer: &mut O,
) -> Result<Replicate<S>, SimError>
where
    StandardNormal: Distribution<S>,
{
    for pair in tracked_pairs {
        pair.validate(params.len())?;
    }
    let n = params.len();
    let h = settings.step();
    let sqrt_h = h.sqrt();
    let beta = params.beta();
    let n_steps = settings.steps(beta);
    let half = lit::<S>(0.5);
    let one = S::one();

    // Drift bases: lambda * beta * h / 4, modulated by the decaying envelope.
    let bases: Vec<S> = params
        .lambdas()
        .iter()
        .map(|&l| l * beta * h / lit::<S>(4.0))
        .collect();
    let zero_lambda: Vec<bool> = params.lambdas().iter().map(|&l| l == S::zero()).collect();
    let env_decay = (-beta * h / lit::<S>(4.0)).exp();

    let away_threshold = lit::<S>(4.0) * beta.powf(lit::<S>(0.25)).atan();

    let mut rng = rng::substream(master_seed, DOMAIN_REPLICATE, replicate);
    let mut alphas = vec![S::zero(); n];
    let mut env = one;

    let mut level_trackers: Vec<JumpTracker<S>> = (0..n).map(|_| JumpTracker::new()).collect();
    let mut pair_trackers: Vec<JumpTracker<S>> =
        tracked_pairs.iter().map(|_| JumpTracker::new()).collect();
    let mut pair_stats = vec![PairStepStats::default(); tracked_pairs.len()];
    let mut order_violations = 0u64;

    for step in 0..n_steps {
        let z1: S = StandardNormal.sample(&mut rng);
        let z2: S = StandardNormal.sample(&mut rng);
        let dx = z1 * sqrt_h;
        let dy = z2 * sqrt_h;

        for i in 0..n {
            let a = alphas[i];
            // lambda = 0 started at zero stays exactly zero: drift and noise
            // coefficients both vanish.
            if zero_lambda[i] && a == S::zero() {
                continue;
            }
            let a_next = a + bases[i] * env + noise_increment(a, dx, dy);
            if !a_next.is_finite() {
                return Err(SimError::NonFinite {
                    replicate,
                    step,
                    process: i,
                });
            }
            alphas[i] = a_next;
        }
        env *= env_decay;

        let t_next = S::from_u64(step + 1).unwrap() * h;
        let t_mid = t_next - h * half;

        for i in 0..n {
            level_trackers[i].update(alphas[i], t_mid);
        }
        for (p, pair) in tracked_pairs.iter().enumerate() {
            let diff = alphas[pair.hi] - alphas[pair.lo];
            pair_trackers[p].update(diff, t_mid);
            let w_lo = wrap_2pi(alphas[pair.lo]);
            let w_hi = wrap_2pi(alphas[pair.hi]);
            if w_hi < w_lo {
                pair_stats[p].below_steps += 1;
            }
            if w_lo >= away_threshold {
                pair_stats[p].lower_away_steps += 1;
            }
        }
        for i in 1..n {
            if alphas[i] < alphas[i - 1] {
                order_violations += 1;
            }
        }

        observer.observe(step + 1, t_next, &alphas);
    }

    let final_time = S::from_u64(n_steps).unwrap() * h;
    let band = settings.settle_band();
    let mut processes = Vec::with_capacity(n + tracked_pairs.len());
    for (i, tracker) in level_trackers.into_iter().enumerate() {
        processes.push(tracker.finish(
            ProcessId::Level(i),
            params.lambdas()[i],
            alphas[i],
            band,
        ));
    }
    for (p, tracker) in pair_trackers.into_iter().enumerate() {
        let pair = tracked_pairs[p];
        let lambda = params.lambdas()[pair.hi] - params.lambdas()[pair.lo];
        processes.push(tracker.finish(
            ProcessId::Difference(pair.lo, pair.hi),
            lambda,
            alphas[pair.hi] - alphas[pair.lo],
            band,
        ));
    }

    Ok(Replicate {
        summary: FamilySummary {
            replicate,
            steps: n_steps,
            final_time,
            final_alphas: alphas,
            order_violations,
            order_checks: n_steps * (n as u64).saturating_sub(1),
            pair_stats,
        },
        ledger: JumpLedger { processes },
    })
}

/// Empirical mean curve of one angle process at the requested checkpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanCurve<S> {
    pub lambda: S,
    /// Checkpoint times snapped to the step grid.
    pub times: Vec<S>,
    pub mean: Vec<S>,
    /// One standard error of the mean per checkpoint.
    pub half_width: Vec<S>,
    pub replicates: usize,
}

struct CheckpointRecorder<S> {
    steps: Vec<u64>,
    values: Vec<Vec<S>>, // [checkpoint][lambda]
    next: usize,
}

impl<S: Scalar> StepObserver<S> for CheckpointRecorder<S> {
    #[inline]
    fn observe(&mut self, step: u64, _t: S, alphas: &[S]) {
        while self.next < self.steps.len() && self.steps[self.next] == step {
            self.values.push(alphas.to_vec());
            self.next += 1;
        }
    }
}

/// Monte Carlo estimate of `E[alpha_lambda(t)]` at the checkpoints, one
/// curve per lambda in the grid. Requires at least 100 replicates.
pub fn mean_alpha<S: Scalar>(
    params: &ModelParams<S>,
    settings: &IntegratorSettings<S>,
    master_seed: u64,
    replicates: usize,
    checkpoints: &[S],
) -> Result<Vec<MeanCurve<S>>, SimError>
where
    StandardNormal: Distribution<S>,
{
    if replicates < 100 {
        return Err(SimError::TooFewReplicates {
            need: 100,
            got: replicates,
        });
    }
    let h = settings.step();
    let n_steps = settings.steps(params.beta());
    let mut steps: Vec<u64> = checkpoints
        .iter()
        .map(|&t| {
            (t / h)
                .round()
                .to_u64()
                .unwrap_or(0)
                .clamp(1, n_steps.max(1))
        })
        .collect();
    steps.sort_unstable();

    let per_rep: Vec<Vec<Vec<S>>> = (0..replicates as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rec = CheckpointRecorder {
                steps: steps.clone(),
                values: Vec::with_capacity(steps.len()),
                next: 0,
            };
            integrate_family(params, settings, master_seed, rep, &[], &mut rec)
                .map(|_| rec.values)
        })
        .collect::<Result<_, _>>()?;

    let n_l = params.len();
    let n_c = steps.len();
    let nf = lit::<S>(replicates as f64);
    let mut curves: Vec<MeanCurve<S>> = params
        .lambdas()
        .iter()
        .map(|&l| MeanCurve {
            lambda: l,
            times: steps.iter().map(|&k| S::from_u64(k).unwrap() * h).collect(),
            mean: vec![S::zero(); n_c],
            half_width: vec![S::zero(); n_c],
            replicates,
        })
        .collect();

    for c in 0..n_c {
        for l in 0..n_l {
            let mut sum = S::zero();
            let mut sumsq = S::zero();
            for rep in &per_rep {
                let v = rep[c][l];
                sum += v;
                sumsq += v * v;
            }
            let mean = sum / nf;
            let var = (sumsq / nf - mean * mean).max(S::zero());
            curves[l].mean[c] = mean;
            curves[l].half_width[c] = (var / nf).sqrt();
        }
    }
    Ok(curves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{PI, TAU};

    fn params(beta: f64, lambdas: &[f64]) -> ModelParams<f64> {
        ModelParams::new(beta, lambdas.to_vec()).unwrap()
    }

    #[test]
    fn drift_closed_form() {
        // lambda beta / 4 at t = 0
        assert_relative_eq!(drift(1.0, 4.0, 0.0), 1.0, max_relative = 1e-15);
        // decays by e^{-2 pi} at t = 8 pi / beta
        let t = 8.0 * PI / 0.02;
        assert_relative_eq!(
            drift(1.0, 0.02, t),
            0.005 * (-TAU).exp(),
            max_relative = 1e-12
        );
        assert!((drift(1.0, 0.02, t) - 9.34e-6).abs() < 1e-8);
    }

    #[test]
    fn drift_integrates_to_lambda() {
        // int_0^inf drift dt = lambda; trapezoid over a long window
        let (lambda, beta) = (5.0, 2.0);
        let h = 1e-3;
        let n = ((160.0 / beta) / h) as usize; // e^{-40} tail
        let mut total = 0.0;
        for k in 0..n {
            let t0 = k as f64 * h;
            total += 0.5 * (drift(lambda, beta, t0) + drift(lambda, beta, t0 + h)) * h;
        }
        assert_relative_eq!(total, lambda, max_relative = 1e-6);
    }

    #[test]
    fn wrap_examples() {
        assert_relative_eq!(wrap_2pi(5.0 * PI / 2.0), PI / 2.0, max_relative = 1e-15);
        assert_relative_eq!(wrap_2pi(-PI / 2.0), 3.0 * PI / 2.0, max_relative = 1e-15);
        assert_eq!(wrap_2pi(4.0 * PI), 0.0);
        assert_eq!(wrap_2pi(0.0f32), 0.0f32);
    }

    #[test]
    fn step_at_zero_angle_is_pure_drift() {
        let p = params(4.0, &[1.0]);
        let state = FamilyState::initial(&p);
        let noise = NoiseIncrements { dx: 0.37, dy: -0.81 };
        let next = step_family(&state, &noise, &p, 0.01).unwrap();
        // cos 0 - 1 = 0 and sin 0 = 0: noise drops out entirely
        assert_relative_eq!(next.alphas[0], drift(1.0, 4.0, 0.0) * 0.01, max_relative = 1e-15);
    }

    #[test]
    fn step_at_pi_has_pure_dx_coefficient() {
        let p = params(1.0, &[1.0]);
        let state = FamilyState {
            t: 0.0,
            alphas: vec![PI],
        };
        let (u, v) = (0.23, 0.91);
        let noise = NoiseIncrements { dx: u, dy: v };
        let next = step_family(&state, &noise, &p, 0.01).unwrap();
        let expected = PI + drift(1.0, 1.0, 0.0) * 0.01 - 2.0 * u;
        assert_relative_eq!(next.alphas[0], expected, max_relative = 1e-12);
    }

    #[test]
    fn non_finite_noise_aborts() {
        let p = params(1.0, &[1.0]);
        let state = FamilyState {
            t: 0.0,
            alphas: vec![1.0],
        };
        let noise = NoiseIncrements {
            dx: f64::NAN,
            dy: 0.0,
        };
        assert!(matches!(
            step_family(&state, &noise, &p, 0.01),
            Err(SimError::NonFinite { .. })
        ));
    }

    #[test]
    fn zero_lambda_family_stays_at_zero() {
        let p = params(0.5, &[0.0]);
        let settings = IntegratorSettings::new(0.01, 3.0, 0.1).unwrap();
        let rep = simulate_replicate(&p, &settings, 1, 0, &[]).unwrap();
        assert_eq!(rep.summary.final_alphas, vec![0.0]);
        assert_eq!(rep.ledger.processes[0].count(), 0);
        assert_eq!(rep.ledger.processes[0].endpoint_count, 0);
        assert!(!rep.ledger.processes[0].unsettled);
    }

    #[test]
    fn same_key_same_ledger() {
        let p = params(0.1, &[TAU, 2.0 * TAU]);
        let settings = IntegratorSettings::new(0.02, 3.0, 0.1).unwrap();
        let pair = [TrackedPair::new(0, 1)];
        let a = simulate_replicate(&p, &settings, 99, 3, &pair).unwrap();
        let b = simulate_replicate(&p, &settings, 99, 3, &pair).unwrap();
        assert_eq!(a, b);
        let c = simulate_replicate(&p, &settings, 99, 4, &pair).unwrap();
        assert_ne!(a.summary.final_alphas, c.summary.final_alphas);
    }

    #[test]
    fn noise_variance_matches_coefficient_identity() {
        // empirical variance of the noise increment at fixed alpha is
        // 4 sin^2(alpha/2) h within 3 standard errors
        let alpha = 1.3f64;
        let h = 0.01;
        let n = 100_000;
        let mut rng = crate::rng::substream(7, crate::rng::DOMAIN_ORACLE, 0);
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let inc = {
                let noise = NoiseIncrements::draw(&mut rng, h);
                noise_increment(alpha, noise.dx, noise.dy)
            };
            sum += inc;
            sumsq += inc * inc;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        let target = 4.0 * (alpha / 2.0).sin().powi(2) * h;
        let se = target * (2.0 / n as f64).sqrt();
        assert!(
            (var - target).abs() < 3.0 * se,
            "var {var} vs target {target} (se {se})"
        );
    }

    #[test]
    fn mean_alpha_trivia() {
        let p = params(0.1, &[TAU]);
        let settings = IntegratorSettings::default();
        assert!(matches!(
            mean_alpha(&p, &settings, 1, 10, &[1.0]),
            Err(SimError::TooFewReplicates { .. })
        ));
        // analytic target: lambda (1 - e^{-beta t / 4}) -> lambda as t -> inf
        let target = |lambda: f64, beta: f64, t: f64| lambda * (1.0 - (-beta * t / 4.0).exp());
        assert_eq!(target(TAU, 0.1, 0.0), 0.0);
        assert_relative_eq!(
            target(TAU, 0.1, 400.0),
            TAU * (1.0 - (-10.0f64).exp()),
            max_relative = 1e-15
        );
    }
}
