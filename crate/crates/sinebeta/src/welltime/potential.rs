//! The stationary potential and its critical points.

use super::WellError;
use crate::scalar::{lit, Scalar};
use serde::{Deserialize, Serialize};

/// Parameters of the stationary well.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WellSpec<S> {
    beta: S,
    lambda: S,
}

impl<S: Scalar> WellSpec<S> {
    /// Requires `beta * lambda > 0`. Warns when the well has disappeared
    /// (`beta * lambda / 8 >= 1/4`, the maximum of the critical-point
    /// equation's right-hand side): the solver will then report no interior
    /// extrema.
    pub fn new(beta: S, lambda: S) -> Result<Self, WellError> {
        if !(beta > S::zero()) || !(lambda > S::zero()) || !beta.is_finite() || !lambda.is_finite()
        {
            return Err(WellError::Param(format!(
                "beta and lambda must be positive and finite, got beta={beta}, lambda={lambda}"
            )));
        }
        let spec = Self { beta, lambda };
        if spec.well_param() >= lit::<S>(0.25) {
            log::warn!(
                "beta*lambda/8 = {} >= 1/4: the well disappears and exit-time quadrature is undefined",
                spec.well_param()
            );
        }
        Ok(spec)
    }

    pub fn beta(&self) -> S {
        self.beta
    }

    pub fn lambda(&self) -> S {
        self.lambda
    }

    /// `beta * lambda / 8`; the well exists iff this is below 1/4.
    pub fn well_param(&self) -> S {
        self.beta * self.lambda / lit::<S>(8.0)
    }

    /// Mean exit-time scale `8 pi / (beta lambda)`.
    pub fn exit_scale(&self) -> S {
        lit::<S>(8.0) * S::PI() / (self.beta * self.lambda)
    }

    /// Rescale factor `beta lambda / (8 pi)` turning physical passage times
    /// into unit-mean ones.
    pub fn rescale(&self) -> S {
        self.beta * self.lambda / (lit::<S>(8.0) * S::PI())
    }
}

/// `log cosh r`, safe for |r| up to and beyond 700.
#[inline]
pub(crate) fn ln_cosh<S: Scalar>(r: S) -> S {
    let a = r.abs();
    if a > lit::<S>(30.0) {
        a - S::LN_2() + (-(a + a)).exp().ln_1p()
    } else {
        a.cosh().ln()
    }
}

/// The stationary potential `-1/2 (lambda beta/4 sinh r + log cosh r)`.
///
/// Composed from log-domain pieces so the evaluation stays finite for |r| up
/// to 700; the value itself may be astronomically large in magnitude, which
/// is fine because consumers only ever exponentiate differences.
#[inline]
pub fn potential<S: Scalar>(r: S, spec: &WellSpec<S>) -> S {
    let half = lit::<S>(0.5);
    -half * (spec.lambda * spec.beta / lit::<S>(4.0) * r.sinh() + ln_cosh(r))
}

/// `V'(r) = -1/2 (lambda beta/4 cosh r + tanh r)`.
#[inline]
pub fn potential_deriv<S: Scalar>(r: S, spec: &WellSpec<S>) -> S {
    let half = lit::<S>(0.5);
    -half * (spec.lambda * spec.beta / lit::<S>(4.0) * r.cosh() + r.tanh())
}

/// Locations and values of the two interior extrema.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CriticalPoints<S> {
    /// Local minimum of V (bottom of the well), deep negative.
    pub a: S,
    /// Local maximum of V (top of the barrier), slightly negative.
    pub b: S,
    pub v_a: S,
    pub v_b: S,
}

/// Bracketed bisection for both roots of `V' = 0`.
///
/// For small beta: `a ~ log(beta lambda / 8)` and `b ~ -beta lambda / 4`.
/// Fails with [`WellError::DegenerateWell`] when `beta lambda / 8 >= 1/4`.
pub fn critical_points<S: Scalar>(spec: &WellSpec<S>) -> Result<CriticalPoints<S>, WellError> {
    // V'(r) = 0  <=>  lambda beta / 4 = -sinh r / cosh^2 r; the RHS peaks at
    // r* = -asinh(1) with value 1/2.
    let r_star = -S::one().asinh();
    if potential_deriv(r_star, spec) <= S::zero() {
        return Err(WellError::DegenerateWell(
            spec.well_param().to_f64().unwrap_or(f64::NAN),
        ));
    }

    // Bottom root: V' goes -inf -> positive on (-inf, r*].
    let mut lo = (spec.well_param().ln() - lit::<S>(2.0)).min(r_star - lit::<S>(2.0));
    let mut guard = 0;
    while potential_deriv(lo, spec) >= S::zero() {
        lo = lo - lit::<S>(4.0);
        guard += 1;
        if guard > 200 {
            return Err(WellError::Param("failed to bracket the well bottom".into()));
        }
    }
    let a = bisect(|r| potential_deriv(r, spec), lo, r_star);

    // Barrier root: V'(r*) > 0, V'(0) = -lambda beta / 8 < 0.
    let b = bisect(|r| potential_deriv(r, spec), r_star, S::zero());

    Ok(CriticalPoints {
        a,
        b,
        v_a: potential(a, spec),
        v_b: potential(b, spec),
    })
}

/// Bisection to floating-point resolution; `f(lo)` and `f(hi)` must have
/// opposite signs with `f(lo) < 0 < f(hi)` or vice versa.
fn bisect<S: Scalar>(f: impl Fn(S) -> S, mut lo: S, mut hi: S) -> S {
    let f_lo = f(lo);
    let positive_lo = f_lo > S::zero();
    let two = lit::<S>(2.0);
    for _ in 0..200 {
        let mid = (lo + hi) / two;
        if mid <= lo || mid >= hi {
            break; // interval collapsed to adjacent floats
        }
        let fm = f(mid);
        if (fm > S::zero()) == positive_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / two
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec(beta: f64, lambda: f64) -> WellSpec<f64> {
        WellSpec::new(beta, lambda).unwrap()
    }

    #[test]
    fn potential_trivia() {
        let s = spec(1e-3, 1.0);
        assert_eq!(potential(0.0, &s), 0.0);
        // superexponential decay to -inf on the right, finite at r = 700
        let v = potential(700.0, &s);
        assert!(v.is_finite() && v < -1e290);
        let v_neg = potential(-700.0, &s);
        assert!(v_neg.is_finite() && v_neg > 1e290);
        assert!(potential(40.0, &s) < potential(30.0, &s));
    }

    #[test]
    fn ln_cosh_matches_naive_in_safe_range() {
        for r in [-25.0f64, -3.0, -0.1, 0.0, 0.2, 5.0, 29.0] {
            assert_relative_eq!(ln_cosh(r), r.cosh().ln(), max_relative = 1e-14);
        }
        // large argument: |r| - ln 2
        assert_relative_eq!(ln_cosh(500.0), 500.0 - std::f64::consts::LN_2, max_relative = 1e-15);
    }

    #[test]
    fn critical_points_match_small_beta_expansions() {
        // beta=1e-4, lambda=1: a ~ log beta - 3 log 2 = -11.28978,
        // b ~ -beta/4, V(a) ~ (log beta)/2 - log 2 + 1/2 = -4.79832
        let s = spec(1e-4, 1.0);
        let cp = critical_points(&s).unwrap();
        assert_relative_eq!(cp.a, -11.2897819132, max_relative = 1e-8);
        assert!((cp.b + 2.5e-5).abs() < 1e-9);
        assert_relative_eq!(cp.v_a, -4.7983173667, max_relative = 1e-8);
        assert!((cp.v_a - (-4.798)).abs() < 1e-3);
        assert!(cp.a < cp.b && cp.v_a < cp.v_b);

        // residuals at the roots
        assert!(potential_deriv(cp.a, &s).abs() < 1e-12);
        assert!(potential_deriv(cp.b, &s).abs() < 1e-12);
    }

    #[test]
    fn root_vs_expansion_gap_is_order_beta_squared() {
        let s = spec(1e-2, 1.0);
        let cp = critical_points(&s).unwrap();
        let expansion = (1e-2f64 / 8.0).ln();
        assert!((cp.a - expansion).abs() < 1e-3);
    }

    #[test]
    fn degenerate_well_reports_no_extrema() {
        // beta*lambda/8 = 0.5 >= 1/4
        let s = spec(1.0, 4.0);
        assert!(matches!(
            critical_points(&s),
            Err(WellError::DegenerateWell(_))
        ));
    }

    #[test]
    fn rejects_nonpositive_parameters() {
        assert!(WellSpec::new(0.0, 1.0).is_err());
        assert!(WellSpec::new(1.0, -1.0).is_err());
    }
}
