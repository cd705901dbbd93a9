//! Log-domain adaptive quadrature for the exit-time double integral.
//!
//! The integrand `exp(2[V(x) - V(y)])` spans hundreds of log units across
//! the integration range, so every exponential is composed in log domain and
//! panel sums are accumulated with log-sum-exp. Integration limits are found
//! by scanning outward until the log-integrand falls `truncation_ratio`
//! below its running peak.

use super::potential::{critical_points, potential, WellSpec};
use super::WellError;
use crate::scalar::{lit, Scalar};
use serde::{Deserialize, Serialize};
use std::cell::Cell;

/// Controls for the adaptive quadrature.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuadratureSettings<S> {
    /// Target relative tolerance (must be below 1e-4).
    pub rel_tol: S,
    /// Contributions this far below the running peak (as a ratio) are cut.
    pub truncation_ratio: S,
    /// Integrand-evaluation budget.
    pub max_evals: u64,
}

impl<S: Scalar> QuadratureSettings<S> {
    pub fn new(rel_tol: S, truncation_ratio: S, max_evals: u64) -> Result<Self, WellError> {
        if !(rel_tol > S::zero()) || !(rel_tol < lit::<S>(1e-4)) {
            return Err(WellError::Param(format!(
                "rel_tol must lie in (0, 1e-4), got {rel_tol}"
            )));
        }
        if !(truncation_ratio > S::zero()) || !(truncation_ratio < S::one()) {
            return Err(WellError::Param(format!(
                "truncation_ratio must lie in (0, 1), got {truncation_ratio}"
            )));
        }
        Ok(Self {
            rel_tol,
            truncation_ratio,
            max_evals,
        })
    }

    /// Log-units below the running peak at which contributions are cut.
    pub(crate) fn log_drop(&self) -> S {
        -self.truncation_ratio.ln()
    }
}

impl<S: Scalar> Default for QuadratureSettings<S> {
    fn default() -> Self {
        Self {
            rel_tol: lit(1e-8),
            truncation_ratio: lit(1e-16),
            max_evals: 20_000_000,
        }
    }
}

/// A deterministic integral evaluation with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult<S> {
    pub value: S,
    pub est_error: S,
    pub evaluations: u64,
}

/// `log(e^a + e^b)` with `-inf` handled.
#[inline]
pub(crate) fn log_add<S: Scalar>(a: S, b: S) -> S {
    if a == S::neg_infinity() {
        return b;
    }
    if b == S::neg_infinity() {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

// Gauss-Kronrod 7-15 abscissae and weights (QUADPACK dqk15 constants).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// Gauss-Kronrod 7-15 panel over `[a, b]` in log domain.
/// Returns `(log K15, relative |G7 - K15|)`.
fn log_gk15<S: Scalar>(log_f: &impl Fn(S) -> S, a: S, b: S, evals: &Cell<u64>) -> (S, S) {
    let two = lit::<S>(2.0);
    let c = (a + b) / two;
    let hw = (b - a) / two;
    let mut k15 = S::neg_infinity();
    let mut g7 = S::neg_infinity();
    for (i, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let (xs, ws) = (lit::<S>(x), lit::<S>(wk).ln());
        let terms: &[S] = if i == 7 {
            &[c][..]
        } else {
            &[c - hw * xs, c + hw * xs][..]
        };
        for &node in terms {
            evals.set(evals.get() + 1);
            let f = log_f(node);
            k15 = log_add(k15, ws + f);
            if i % 2 == 1 || i == 7 {
                let wgauss = lit::<S>(WG[i / 2]).ln();
                g7 = log_add(g7, wgauss + f);
            }
        }
    }
    let log_k15 = hw.ln() + k15;
    let rel = if k15 == S::neg_infinity() && g7 == S::neg_infinity() {
        S::zero()
    } else {
        ((g7 - k15).exp() - S::one()).abs()
    };
    (log_k15, rel)
}

struct Panel<S> {
    a: S,
    b: S,
    value: S,
    rel: S,
    depth: u32,
}

/// Adaptive Gauss-Kronrod in log domain: integrates `exp(log_f)` over
/// `[lo, hi]`.
///
/// Returns `(log_value, log_abs_error)`. Panels whose value falls
/// `log_drop` below the largest panel seen are accepted immediately.
pub(crate) fn integrate_log<S: Scalar>(
    log_f: &impl Fn(S) -> S,
    lo: S,
    hi: S,
    rel_tol: S,
    log_drop: S,
    evals: &Cell<u64>,
    budget: u64,
) -> Result<(S, S), WellError> {
    debug_assert!(lo < hi);
    let two = lit::<S>(2.0);

    const INITIAL: usize = 16;
    let width = (hi - lo) / lit::<S>(INITIAL as f64);
    let mut stack: Vec<Panel<S>> = Vec::with_capacity(64);
    let mut peak = S::neg_infinity();
    for k in 0..INITIAL {
        let a = lo + width * lit::<S>(k as f64);
        let b = if k + 1 == INITIAL { hi } else { a + width };
        let (value, rel) = log_gk15(log_f, a, b, evals);
        peak = peak.max(value);
        stack.push(Panel {
            a,
            b,
            value,
            rel,
            depth: 0,
        });
    }

    let mut total = S::neg_infinity();
    let mut err_total = S::neg_infinity();
    while let Some(p) = stack.pop() {
        if evals.get() > budget {
            return Err(WellError::ToleranceNotReached {
                value: total.exp().to_f64().unwrap_or(f64::NAN),
                rel_err: f64::NAN,
            });
        }
        let err_log = p.value + p.rel.max(lit::<S>(1e-300)).ln();
        let negligible = p.value < peak - log_drop;
        // a panel whose absolute error cannot move the total need not meet
        // the relative criterion (tails sit in float-cancellation noise)
        let err_negligible = err_log < peak + rel_tol.ln() - lit::<S>(256.0).ln();
        if negligible
            || err_negligible
            || p.rel < rel_tol
            || p.depth >= 48
            || !p.rel.is_finite()
        {
            total = log_add(total, p.value);
            err_total = log_add(err_total, err_log);
            continue;
        }
        let m = (p.a + p.b) / two;
        for (a, b) in [(p.a, m), (m, p.b)] {
            let (value, rel) = log_gk15(log_f, a, b, evals);
            peak = peak.max(value);
            stack.push(Panel {
                a,
                b,
                value,
                rel,
                depth: p.depth + 1,
            });
        }
    }
    Ok((total, err_total))
}

/// Walk outward from `start` in steps of `step * dir` until the
/// log-integrand drops `log_drop` below its running peak (or turns NaN).
pub(crate) fn scan_cutoff<S: Scalar>(
    log_f: &impl Fn(S) -> S,
    start: S,
    dir: S,
    step: S,
    log_drop: S,
    max_steps: u32,
) -> S {
    let mut x = start;
    let mut peak = log_f(start);
    for _ in 0..max_steps {
        x = x + dir * step;
        let v = log_f(x);
        if v.is_nan() {
            return x;
        }
        if v > peak {
            peak = v;
        } else if v < peak - log_drop {
            return x;
        }
    }
    x
}

/// Largest |2V| magnitude the quadrature is allowed to touch. Beyond this
/// the float resolution of `2V(x) + log int e^{-2V}` (a cancellation of two
/// like-sized numbers) exceeds the signal; the discarded tail decays like
/// `8/(beta lambda) e^{-x}` and totals under 1e-13 in absolute value.
const TWO_V_CAP: f64 = 1e13;

/// Rightmost x the integrals may reach for this well: `|2V(x)| ~ 1e13`.
pub(crate) fn cancellation_cap<S: Scalar>(spec: &WellSpec<S>) -> S {
    (lit::<S>(8.0 * TWO_V_CAP) / (spec.lambda() * spec.beta())).ln()
}

/// Expected exit time `t(r) = 2 int_r^inf dx int_{-inf}^x e^{2[V(x)-V(y)]} dy`.
///
/// Monotone decreasing in `r`; near the well bottom it approaches
/// `8 pi / (beta lambda)` as `beta -> 0`.
pub fn expected_exit_time<S: Scalar>(
    r: S,
    spec: &WellSpec<S>,
    qset: &QuadratureSettings<S>,
) -> Result<QuadratureResult<S>, WellError> {
    if !r.is_finite() {
        return Err(WellError::Input(format!("r must be finite, got {r}")));
    }
    let x_cap = cancellation_cap(spec);
    if (lit::<S>(2.0) * potential(r, spec)).abs() > lit::<S>(TWO_V_CAP) || r >= x_cap {
        return Err(WellError::Input(format!(
            "r = {r} is too far outside the well for double-precision quadrature"
        )));
    }
    let cp = critical_points(spec)?;
    let log_drop = qset.log_drop() + lit::<S>(6.0);
    let evals = Cell::new(0u64);
    let inner_tol = qset.rel_tol / lit::<S>(4.0);
    let outer_tol = qset.rel_tol / lit::<S>(2.0);

    let g_in = |y: S| -lit::<S>(2.0) * potential(y, spec);
    let g_in_a = g_in(cp.a);

    // log of int_{-inf}^x e^{-2V(y)} dy with the lower limit truncated where
    // the integrand is negligible relative to its peak on (-inf, x]
    let inner = |x: S| -> Result<S, WellError> {
        let y_star = if x <= cp.a || g_in(x) > g_in_a {
            x
        } else {
            cp.a
        };
        let y_lo = scan_cutoff(&g_in, y_star, -S::one(), S::one(), log_drop, 4000);
        let (val, _) = integrate_log(
            &g_in,
            y_lo,
            x,
            inner_tol,
            log_drop,
            &evals,
            qset.max_evals,
        )?;
        Ok(val)
    };

    let g_out = |x: S| -> S {
        match inner(x) {
            Ok(li) => lit::<S>(2.0) * potential(x, spec) + li,
            Err(_) => S::nan(),
        }
    };

    // outer peak sits near max(r, b); the tail decays like e^{-x} and is
    // hard-capped where float cancellation would outrun the signal
    let scan_start = r.max(cp.b);
    let scan_steps = ((x_cap - scan_start) / lit::<S>(2.0))
        .ceil()
        .to_u32()
        .unwrap_or(0)
        .min(4000);
    let x_hi = scan_cutoff(&g_out, scan_start, S::one(), lit::<S>(2.0), log_drop, scan_steps)
        .min(x_cap);
    let (log_outer, log_err) = integrate_log(
        &g_out,
        r,
        x_hi,
        outer_tol,
        log_drop,
        &evals,
        qset.max_evals,
    )?;

    let value = lit::<S>(2.0) * log_outer.exp();
    // capped-tail allowance: int_{x_cap}^inf ~ 8/(beta lambda) e^{-x_cap}
    let tail = lit::<S>(8.0) / (spec.beta() * spec.lambda()) * (-x_hi).exp() / value;
    let rel_outer = (log_err - log_outer).exp();
    let rel = rel_outer + inner_tol + tail;
    let result = QuadratureResult {
        value,
        est_error: value * rel,
        evaluations: evals.get(),
    };
    if !(rel <= qset.rel_tol) || !value.is_finite() {
        return Err(WellError::ToleranceNotReached {
            value: value.to_f64().unwrap_or(f64::NAN),
            rel_err: rel.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn log_add_handles_extremes() {
        assert_eq!(log_add(f64::NEG_INFINITY, 3.0), 3.0);
        assert_eq!(log_add(3.0, f64::NEG_INFINITY), 3.0);
        assert_relative_eq!(
            log_add(1000.0, 1000.0),
            1000.0 + std::f64::consts::LN_2,
            max_relative = 1e-15
        );
        // wildly separated magnitudes collapse to the larger
        assert_eq!(log_add(-1e300, 50.0), 50.0);
    }

    #[test]
    fn integrates_a_gaussian_in_log_domain() {
        // int e^{-x^2/2} = sqrt(2 pi)
        let f = |x: f64| -0.5 * x * x;
        let evals = Cell::new(0);
        let (lv, _) = integrate_log(&f, -40.0, 40.0, 1e-10, 60.0, &evals, 10_000_000).unwrap();
        assert_relative_eq!(lv.exp(), (2.0 * std::f64::consts::PI).sqrt(), max_relative = 1e-9);
    }

    #[test]
    fn integrates_shifted_gaussian_with_huge_log_offset() {
        // e^{500} int e^{-x^2/2}: value overflows f64, log must not
        let f = |x: f64| 500.0 - 0.5 * x * x;
        let evals = Cell::new(0);
        let (lv, _) = integrate_log(&f, -40.0, 40.0, 1e-10, 60.0, &evals, 10_000_000).unwrap();
        assert_relative_eq!(
            lv,
            500.0 + (2.0 * std::f64::consts::PI).sqrt().ln(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn exit_time_decreases_in_r() {
        let spec = WellSpec::new(0.01, 1.0).unwrap();
        let qset = QuadratureSettings::default();
        let cp = critical_points(&spec).unwrap();
        let t1 = expected_exit_time(cp.a - 1.0, &spec, &qset).unwrap();
        let t2 = expected_exit_time(cp.a + 1.0, &spec, &qset).unwrap();
        let t3 = expected_exit_time(cp.b, &spec, &qset).unwrap();
        assert!(t1.value > t2.value && t2.value > t3.value);
        assert!(t1.est_error <= qset.rel_tol * t1.value);
        assert!(t1.evaluations > 0);
    }

    #[test]
    fn exit_time_near_asymptotic_scale() {
        // beta = 1e-3: t(a) ~ 8 pi / beta within a few percent
        let spec = WellSpec::new(1e-3f64, 1.0).unwrap();
        let qset = QuadratureSettings::default();
        let cp = critical_points(&spec).unwrap();
        let t = expected_exit_time(cp.a, &spec, &qset).unwrap();
        let scale: f64 = spec.exit_scale();
        assert!((t.value / scale - 1.0).abs() < 0.03, "t = {}", t.value);
        // frozen from an independent dense-grid evaluation
        assert_relative_eq!(t.value, 25130.76, max_relative = 2e-4);
    }
}
