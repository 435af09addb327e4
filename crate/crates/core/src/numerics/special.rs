//! Special functions used by the analytic quadrature tails and the mollifiers.

use num_complex::Complex;

use crate::scalar::Real;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const MAX_ITER: usize = 200;

/// `E₁(i·t)` for `t > 0`, i.e. `∫_t^∞ e^{-iu}/u du = -Ci(t) + i(Si(t) - π/2)`.
///
/// Continued fraction above `t = 2`, power series below; accurate to a few ulps.
pub fn e1_imaginary<T: Real>(t: T) -> Complex<T> {
    assert!(t > T::zero(), "e1_imaginary requires t > 0");
    let eps = T::epsilon();
    let one = Complex::new(T::one(), T::zero());
    if t > T::lit(2.0) {
        let fpmin = T::min_positive_value() / eps;
        let mut b = Complex::new(T::one(), t);
        let mut c = Complex::new(T::one() / fpmin, T::zero());
        let mut d = one / b;
        let mut h = d;
        for i in 2..=MAX_ITER {
            let a = -T::from_usize_lossy((i - 1) * (i - 1));
            b = b + Complex::new(T::lit(2.0), T::zero());
            d = one / (d * a + b);
            c = b + Complex::new(a, T::zero()) / c;
            let del = c * d;
            h = h * del;
            if (del.re - T::one()).abs() + del.im.abs() < eps {
                break;
            }
        }
        Complex::new(t.cos(), -t.sin()) * h
    } else {
        let (ci, si) = cisi_series(t);
        Complex::new(-ci, si - T::FRAC_PI_2())
    }
}

fn cisi_series<T: Real>(t: T) -> (T, T) {
    let eps = T::epsilon();
    let (mut sum, mut sums, mut sumc) = (T::zero(), T::zero(), T::zero());
    let mut sign = T::one();
    let mut fact = T::one();
    let mut odd = true;
    for k in 1..=MAX_ITER {
        let kf = T::from_usize_lossy(k);
        fact = fact * t / kf;
        let term = fact / kf;
        sum = sum + sign * term;
        let err = term / sum.abs();
        if odd {
            sign = -sign;
            sums = sum;
            sum = sumc;
        } else {
            sumc = sum;
            sum = sums;
        }
        if err < eps {
            break;
        }
        odd = !odd;
    }
    (sumc + t.ln() + T::lit(EULER_GAMMA), sums)
}

/// Cosine and sine integrals `(Ci(x), Si(x))` for `x > 0`.
pub fn cisi<T: Real>(x: T) -> (T, T) {
    let e1 = e1_imaginary(x);
    (-e1.re, e1.im + T::FRAC_PI_2())
}

/// `∫_Ξ^∞ e^{iθζ} ζ^{-n} dζ` for `n = 1..=max_order`, returned as a vector indexed by `n - 1`.
///
/// Upward recursion from `n = 1`; when `θ = 0` only orders `n ≥ 2` are finite and the first
/// entry is returned as NaN.
pub fn oscillatory_power_tails<T: Real>(theta: T, xi: T, max_order: usize) -> Vec<Complex<T>> {
    assert!(xi > T::zero() && max_order >= 1);
    let mut out = Vec::with_capacity(max_order);
    if theta == T::zero() {
        out.push(Complex::new(T::nan(), T::zero()));
        for n in 2..=max_order {
            let nm1 = T::from_usize_lossy(n - 1);
            out.push(Complex::new(xi.powf(-nm1) / nm1, T::zero()));
        }
        return out;
    }
    let e1 = e1_imaginary(theta.abs() * xi);
    let j1 = if theta > T::zero() { e1.conj() } else { e1 };
    out.push(j1);
    let carrier = T::cis(theta * xi);
    let i_theta = Complex::new(T::zero(), theta);
    for n in 2..=max_order {
        let nm1 = T::from_usize_lossy(n - 1);
        let prev = out[n - 2];
        out.push(carrier * (xi.powf(-nm1) / nm1) + i_theta * prev / nm1);
    }
    out
}

/// Standard normal cumulative distribution `Φ(z)`.
pub fn normal_cdf<T: Real>(z: T) -> T {
    T::lit(0.5 * libm::erfc(-z.as_f64() / std::f64::consts::SQRT_2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cisi_reference_values() {
        // Abramowitz & Stegun table 5.1.
        let (ci, si) = cisi(1.0_f64);
        assert_abs_diff_eq!(si, 0.946_083_070_367_183, epsilon = 1e-15);
        assert_abs_diff_eq!(ci, 0.337_403_922_900_968_1, epsilon = 1e-15);
        let (ci, si) = cisi(10.0_f64);
        assert_abs_diff_eq!(si, 1.658_347_594_218_874, epsilon = 1e-14);
        assert_abs_diff_eq!(ci, -0.045_456_433_004_455_4, epsilon = 1e-14);
    }

    #[test]
    fn cisi_branches_agree_at_switch() {
        let (c1, s1) = cisi(2.0_f64 - 1e-9);
        let (c2, s2) = cisi(2.0_f64 + 1e-9);
        assert_abs_diff_eq!(c1, c2, epsilon = 1e-8);
        assert_abs_diff_eq!(s1, s2, epsilon = 1e-8);
    }

    #[test]
    fn power_tail_matches_integration_by_parts_series() {
        // ∫_Ξ^∞ e^{iθζ} ζ^{-2} dζ ~ e^{iθΞ} Σ_m (m+1)! i(-i)^m / (θ^{m+1} Ξ^{m+2}) for θΞ ≫ 1.
        let (theta, xi) = (3.0_f64, 400.0_f64);
        let j = oscillatory_power_tails(theta, xi, 2)[1];
        let mut series = Complex::new(0.0, 0.0);
        let mut fact = 1.0;
        let i = Complex::new(0.0, 1.0);
        for m in 0..6 {
            fact *= (m + 1) as f64;
            let i_pow = i * (-i).powu(m as u32);
            series += i_pow * fact / (theta.powi(m + 1) * xi.powi(m + 2));
        }
        series *= f64::cis(theta * xi);
        assert_abs_diff_eq!(j.re, series.re, epsilon = 1e-17);
        assert_abs_diff_eq!(j.im, series.im, epsilon = 1e-17);
    }

    #[test]
    fn zero_frequency_tail_is_power_integral() {
        let j = oscillatory_power_tails(0.0_f64, 10.0, 3);
        assert!(j[0].re.is_nan());
        assert_abs_diff_eq!(j[1].re, 0.1, epsilon = 1e-16);
        assert_abs_diff_eq!(j[2].re, 0.005, epsilon = 1e-16);
    }

    #[test]
    fn normal_cdf_symmetry() {
        assert_abs_diff_eq!(normal_cdf(0.0_f64), 0.5, epsilon = 1e-16);
        assert_abs_diff_eq!(normal_cdf(1.3_f64) + normal_cdf(-1.3), 1.0, epsilon = 1e-15);
    }
}
