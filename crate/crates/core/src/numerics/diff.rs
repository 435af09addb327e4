use num_complex::Complex;

use crate::scalar::Real;

/// Second-order central difference `(f(x+h) - f(x-h)) / 2h`.
pub fn central_difference<T: Real>(f: impl Fn(T) -> T, x: T, h: T) -> T {
    (f(x + h) - f(x - h)) / (h + h)
}

/// Derivative of uniformly spaced samples: central differences inside, one-sided at the ends.
pub fn sampled_derivative<T: Real>(values: &[Complex<T>], dt: T) -> Vec<Complex<T>> {
    let n = values.len();
    if n < 2 {
        return vec![Complex::new(T::zero(), T::zero()); n];
    }
    let two_dt = dt + dt;
    (0..n)
        .map(|i| match i {
            0 => (values[1] - values[0]) / dt,
            i if i == n - 1 => (values[n - 1] - values[n - 2]) / dt,
            i => (values[i + 1] - values[i - 1]) / two_dt,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn central_difference_of_sine() {
        let d = central_difference(f64::sin, 0.3, 1e-4);
        assert_abs_diff_eq!(d, 0.3f64.cos(), epsilon = 1e-8);
    }

    #[test]
    fn sampled_derivative_of_line() {
        let v: Vec<_> = (0..5).map(|i| Complex::new(2.0 * i as f64 * 0.1, 0.0)).collect();
        for d in sampled_derivative(&v, 0.1) {
            assert_abs_diff_eq!(d.re, 2.0, epsilon = 1e-12);
        }
    }
}
