use crate::error::{Error, Result};
use crate::scalar::Real;

/// Converged root of a scalar equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root<T> {
    pub value: T,
    pub residual: T,
    pub iterations: usize,
}

/// Newton's method; succeeds once `|f(root)| ≤ tol`.
pub fn newton_1d<T: Real>(
    f: impl Fn(T) -> T,
    f_prime: impl Fn(T) -> T,
    seed: T,
    tol: T,
    max_iter: usize,
) -> Result<Root<T>> {
    let mut x = seed;
    let mut fx = f(x);
    for it in 0..=max_iter {
        if !fx.is_finite() {
            return Err(Error::SolverFailure(format!("non-finite residual at x = {x} (iteration {it})")));
        }
        if fx.abs() <= tol {
            return Ok(Root { value: x, residual: fx, iterations: it });
        }
        if it == max_iter {
            break;
        }
        let d = f_prime(x);
        if !(d.abs() > T::min_positive_value()) || !d.is_finite() {
            return Err(Error::SolverFailure(format!("derivative underflow at x = {x}")));
        }
        x = x - fx / d;
        fx = f(x);
    }
    Err(Error::SolverFailure(format!(
        "newton did not reach |f| <= {tol:e} in {max_iter} iterations (last residual {fx:e})"
    )))
}

/// Bisection on a sign-changing bracket `[a, b]`; returns the midpoint once the bracket is
/// narrower than `x_tol`.
pub fn bisect<T: Real>(f: impl Fn(T) -> T, mut a: T, mut b: T, x_tol: T) -> Result<T> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if (fa > T::zero()) == (fb > T::zero()) {
        return Err(Error::SolverFailure("bisection bracket has no sign change".into()));
    }
    for _ in 0..200 {
        let m = (a + b) * T::lit(0.5);
        if (b - a).abs() <= x_tol || m == a || m == b {
            return Ok(m);
        }
        let fm = f(m);
        if fm == T::zero() {
            return Ok(m);
        }
        if (fm > T::zero()) == (fa > T::zero()) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok((a + b) * T::lit(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn linear_root() {
        let r = newton_1d(|t: f64| t - 0.5, |_| 1.0, 3.0, 1e-14, 10).unwrap();
        assert_abs_diff_eq!(r.value, 0.5, epsilon = 1e-14);
        assert!(r.iterations <= 1);
    }

    #[test]
    fn cubic_converges_linearly_within_budget() {
        let tol = 1e-12;
        let r = newton_1d(|t: f64| t * t * t, |t| 3.0 * t * t, 1.0, tol, 100).unwrap();
        assert!(r.residual.abs() <= tol);
        assert!(r.iterations > 10);
    }

    #[test]
    fn gaussian_overlap_derivative_root() {
        // Case-1 correlation with the standard Gaussian mollifier: c_ε(t) ∝ exp(-k²/4) with
        // k = (t + x(1 - 1/γ))/ε; its t-derivative vanishes at t = -x(1 - 1/γ).
        let (x, gamma, eps) = (1.0_f64, 2.0_f64, 0.05_f64);
        let tbar = -x * (1.0 - 1.0 / gamma);
        let k = |t: f64| (t - tbar) / eps;
        let f = |t: f64| -(k(t) / 2.0) * (-k(t) * k(t) / 4.0).exp() / eps;
        let fp = |t: f64| (k(t) * k(t) / 4.0 - 0.5) * (-k(t) * k(t) / 4.0).exp() / (eps * eps);
        // Newton's basin for f is |k| < √2; from t = 0 (k = 10) it walks out into the
        // Gaussian tail, where |f| is tiny but the point is spurious.
        if let Ok(r) = newton_1d(f, fp, 0.0, 1e-13, 50) {
            assert!((r.value + 0.5).abs() > 0.1);
        }
        let r = newton_1d(f, fp, -0.45, 1e-13, 50).unwrap();
        assert_abs_diff_eq!(r.value, -0.5, epsilon = 1e-10);
        // The logarithmic derivative -k/(2ε) has the same root and converges from t = 0.
        let r = newton_1d(|t| -k(t) / (2.0 * eps), |_| -1.0 / (2.0 * eps * eps), 0.0, 1e-13, 50).unwrap();
        assert_abs_diff_eq!(r.value, -0.5, epsilon = 1e-10);
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let e = newton_1d(|t: f64| t * t + 1.0, |t| 2.0 * t, 1.0, 1e-12, 20).unwrap_err();
        assert!(matches!(e, Error::SolverFailure(_)));
    }

    #[test]
    fn zero_derivative_is_an_error() {
        let e = newton_1d(|t: f64| t * t - 1.0, |t| 2.0 * t, 0.0, 1e-12, 20).unwrap_err();
        assert!(matches!(e, Error::SolverFailure(_)));
    }

    #[test]
    fn bisection_finds_cosine_zero() {
        let z = bisect(|t: f64| t.cos(), 1.0, 2.0, 1e-13).unwrap();
        assert_abs_diff_eq!(z, std::f64::consts::FRAC_PI_2, epsilon = 1e-12);
    }
}
