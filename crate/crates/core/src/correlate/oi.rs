//! Correlation of the plane OI traces and its Fourier-side representations.

use num_complex::Complex;
use rayon::prelude::*;

use super::{CorrelationCurve, CorrelationMethod, CurveMeta};
use crate::error::{invalid, Error, Result};
use crate::numerics::special::{normal_cdf, oscillatory_power_tails};
use crate::numerics::{
    integrate_interval, DecayingAmplitude, OscillatoryRule, Phase, QuadParams, QuadResult, TailModel,
};
use crate::regularize::{CutoffChi, TimeGrid};
use crate::scalar::Real;

fn check_geometry<T: Real>(x: T, gamma: T) -> Result<()> {
    if x == T::zero() || !x.is_finite() {
        return Err(invalid("station x must be finite and nonzero"));
    }
    if !(gamma > T::zero()) || !gamma.is_finite() {
        return Err(invalid("gamma must be positive"));
    }
    Ok(())
}

fn scaled<T: Real>(r: QuadResult<T>, factor: Complex<T>) -> QuadResult<T> {
    let m = factor.norm();
    QuadResult {
        value: r.value * factor,
        error_bound: r.error_bound * m,
        panels_used: r.panels_used,
        tail_bound: r.tail_bound * m,
    }
}

fn tolerance_error<T: Real>(tol: T, bound: T, context: String) -> Error {
    Error::ToleranceUnreachable { tol: tol.as_f64(), bound: bound.as_f64(), context }
}

/// Prepared evaluator of
/// `c(t) = (8π/γ) ∫_0^∞ e^{-itζ} cos(xζ) cos(xζ/γ) χ(ζ)χ(ζ/γ)/ζ² dζ`,
/// the half-line fold of the two-term OI correlation.
#[derive(Debug, Clone)]
pub struct OiCorrelator<T> {
    rule: OscillatoryRule<T>,
    x: T,
    gamma: T,
    t_max: T,
    params: QuadParams<T>,
}

impl<T: Real> OiCorrelator<T> {
    /// Prepares panels valid for every `|t| ≤ t_max`.
    pub fn new(x: T, gamma: T, chi: &CutoffChi<T>, t_max: T, params: &QuadParams<T>) -> Result<Self> {
        check_geometry(x, gamma)?;
        params.validate()?;
        let reach = T::one().max(gamma);
        let chi = *chi;
        let amp = move |z: T| {
            let a = chi.eval(z) * chi.eval(z / gamma);
            if a == T::zero() {
                T::zero()
            } else {
                a / (z * z)
            }
        };
        let amplitude = DecayingAmplitude {
            eval: &amp,
            decay_order: 2,
            support_start: chi.r0() * reach,
            tail: TailModel::Laurent {
                from: chi.r1() * reach,
                coeffs: vec![T::one()],
                remainder_constant: T::zero(),
                ratio: T::zero(),
            },
        };
        let quarter = T::lit(0.25);
        let (f1, f2) = (x + x / gamma, x - x / gamma);
        let modulation =
            [Phase::real(quarter, f1), Phase::real(quarter, -f1), Phase::real(quarter, f2), Phase::real(quarter, -f2)];
        let scale = T::lit(8.0) * T::PI() / gamma;
        let inner = QuadParams { tol: params.tol / scale, ..*params };
        let rule = OscillatoryRule::prepare(&amplitude, T::zero(), &modulation, t_max.abs(), &inner)?;
        Ok(Self { rule, x, gamma, t_max: t_max.abs(), params: *params })
    }

    pub fn panels(&self) -> usize {
        self.rule.panels()
    }

    pub fn eval(&self, t: T) -> Result<QuadResult<T>> {
        if t.abs() > self.t_max {
            return Err(invalid(format!("t = {t} outside the prepared range |t| <= {}", self.t_max)));
        }
        let scale = T::lit(8.0) * T::PI() / self.gamma;
        Ok(scaled(self.rule.integrate(-t), Complex::new(scale, T::zero())))
    }

    /// Samples the correlation on `grid`; every point must meet the tolerance.
    pub fn curve(&self, grid: &TimeGrid<T>) -> Result<CorrelationCurve<T>> {
        let times = grid.points();
        let results: Vec<Result<QuadResult<T>>> = times.par_iter().map(|&t| self.eval(t)).collect();
        let mut values = Vec::with_capacity(grid.n);
        let mut bounds = Vec::with_capacity(grid.n);
        for (r, t) in results.into_iter().zip(&times) {
            let r = r?;
            if r.error_bound > self.params.tol {
                return Err(tolerance_error(self.params.tol, r.error_bound, format!("correlation at t = {t}")));
            }
            values.push(r.value);
            bounds.push(r.error_bound);
        }
        let meta = CurveMeta {
            method: CorrelationMethod::OscillatoryIntegral,
            station: self.x,
            gamma: self.gamma,
            eps: None,
            tol: Some(self.params.tol),
            xi_max: Some(self.params.xi_max),
        };
        CorrelationCurve::new(*grid, values, bounds, meta)
    }
}

/// Correlation of the plane OI traces of speeds 1 and `γ` at station `x`.
pub fn correlate_oi<T: Real>(
    x: T,
    gamma: T,
    chi: &CutoffChi<T>,
    grid: &TimeGrid<T>,
    params: &QuadParams<T>,
) -> Result<CorrelationCurve<T>> {
    let t_max = grid.t_min.abs().max(grid.t_max.abs());
    OiCorrelator::new(x, gamma, chi, t_max, params)?.curve(grid)
}

/// Number of Laurent terms of `Σ ρ^m ζ^{-2-m}` needed beyond `xi` for the remainder to drop
/// below `target`, and that remainder bound.
fn laurent_terms<T: Real>(ratio: T, constant: T, xi: T, target: T) -> (usize, T) {
    let bound = |m: usize| {
        let order = T::from_usize_lossy(m + 1);
        constant * ratio.powi(m as i32) * xi.powf(-order) / (order * (T::one() - ratio / xi))
    };
    if ratio == T::zero() {
        return (1, T::zero());
    }
    let mut m = 1;
    while bound(m) > target && m < 64 {
        m += 1;
    }
    (m, bound(m))
}

/// Fourier transform `ŵ(r)` of the correlation kernel `w_{x,t}`:
///
/// `4π e^{itr} ∫_{ζ ≥ max(r₀, r + γr₀)} 2cos(xζ) e^{-itζ} cos((x/γ)(ζ - r)) χ(ζ)χ((ζ-r)/γ) / (γζ(ζ-r)) dζ`.
pub fn ft_w<T: Real>(x: T, gamma: T, t: T, r: T, chi: &CutoffChi<T>, params: &QuadParams<T>) -> Result<QuadResult<T>> {
    check_geometry(x, gamma)?;
    params.validate()?;
    let chi = *chi;
    let lo = chi.r0().max(r + gamma * chi.r0()).max(T::zero());
    let from = chi.r1().max(r + gamma * chi.r1());
    let four = T::lit(4.0);
    let xi_max = params.xi_max.max(four * from).max(four * r.abs());
    let prefactor = T::cis(t * r) * (four * T::PI());
    let inner_tol = params.tol / (four * T::PI());
    let (m, _) = laurent_terms(r.abs(), gamma.recip(), xi_max, inner_tol * T::lit(1e-3));
    let coeffs: Vec<T> = (0..m).map(|j| r.powi(j as i32) / gamma).collect();
    let amp = move |z: T| {
        let eta = z - r;
        if eta <= T::zero() {
            return T::zero();
        }
        let a = chi.eval(z) * chi.eval(eta / gamma);
        if a == T::zero() {
            T::zero()
        } else {
            a / (gamma * z * eta)
        }
    };
    let amplitude = DecayingAmplitude {
        eval: &amp,
        decay_order: 2,
        support_start: lo,
        tail: TailModel::Laurent { from, coeffs, remainder_constant: gamma.recip(), ratio: r.abs() },
    };
    let half = T::lit(0.5);
    let (f1, f2) = (x + x / gamma, x - x / gamma);
    let shift = x * r / gamma;
    let modulation = [
        Phase::new(T::cis(-shift) * half, f1),
        Phase::new(T::cis(shift) * half, -f1),
        Phase::new(T::cis(shift) * half, f2),
        Phase::new(T::cis(-shift) * half, -f2),
    ];
    let inner = QuadParams { xi_max, tol: inner_tol, max_panels: params.max_panels };
    let rule = OscillatoryRule::prepare(&amplitude, lo, &modulation, t.abs(), &inner)?;
    let res = scaled(rule.integrate(-t), prefactor);
    if res.error_bound > params.tol {
        return Err(tolerance_error(params.tol, res.error_bound, format!("ft_w at t = {t}, r = {r}")));
    }
    Ok(res)
}

/// `φ(s) = exp(-(s-c)²/(2σ²)) e^{iωs}` with `F[φ](k) = σ√(2π) e^{-σ²(k-ω)²/2} e^{-i(k-ω)c}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianTestFn<T> {
    pub center: T,
    pub width: T,
    pub freq: T,
}

impl<T: Real> GaussianTestFn<T> {
    pub fn new(center: T, width: T, freq: T) -> Result<Self> {
        if !(width > T::zero()) || !center.is_finite() || !freq.is_finite() {
            return Err(invalid("test function needs a positive width and finite center and frequency"));
        }
        Ok(Self { center, width, freq })
    }

    pub fn eval(&self, s: T) -> Complex<T> {
        let z = (s - self.center) / self.width;
        T::cis(self.freq * s) * (-(z * z) * T::lit(0.5)).exp()
    }

    pub fn fourier(&self, k: T) -> Complex<T> {
        let d = k - self.freq;
        let mag = self.width * T::TAU().sqrt() * (-(self.width * self.width * d * d) * T::lit(0.5)).exp();
        T::cis(-d * self.center) * mag
    }

    /// `∫|F[φ]|` outside `|k - ω| ≤ n/σ`.
    fn fourier_mass_outside(&self, n: T) -> T {
        T::lit(4.0) * T::PI() * (T::one() - normal_cdf(n))
    }
}

const WINDOW_SIGMAS: f64 = 10.0;

fn window_breaks<T: Real>(center: T, width: T) -> Vec<T> {
    let n = WINDOW_SIGMAS as i32;
    (-n..=n).map(|j| center + T::lit(j as f64) / width).collect()
}

/// Runs `integrate_interval` on a fallible integrand, surfacing the first inner failure.
fn integrate_fallible<T: Real>(
    f: impl Fn(T) -> Result<(Complex<T>, T)>,
    breaks: &[T],
    tol: T,
) -> Result<(QuadResult<T>, T)> {
    let failure = std::cell::RefCell::new(None);
    let worst = std::cell::Cell::new(T::zero());
    let res = integrate_interval(
        |s| match f(s) {
            Ok((v, e)) => {
                worst.set(worst.get().max(e));
                v
            }
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                Complex::new(T::zero(), T::zero())
            }
        },
        breaks,
        tol,
        1 << 14,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok((res?, worst.get()))
}

/// `⟨w_{x,t}, φ⟩ = (1/2π) ∫ ŵ(r) F[φ](-r) dr` with `ŵ` from [`ft_w`].
pub fn parseval_pairing<T: Real>(
    x: T,
    gamma: T,
    t: T,
    test: &GaussianTestFn<T>,
    chi: &CutoffChi<T>,
    params: &QuadParams<T>,
) -> Result<QuadResult<T>> {
    let inner = QuadParams { tol: params.tol * T::lit(0.1), ..*params };
    let breaks = window_breaks(-test.freq, test.width);
    let (res, worst) = integrate_fallible(
        |r| {
            let w = ft_w(x, gamma, t, r, chi, &inner)?;
            Ok((w.value * test.fourier(-r), w.error_bound))
        },
        &breaks,
        params.tol * T::lit(0.5),
    )?;
    let inv = T::TAU().recip();
    let sup = pointwise_sup(gamma, chi) * T::lit(2.0) * T::TAU();
    let truncation = inv * sup * test.fourier_mass_outside(T::lit(WINDOW_SIGMAS));
    let propagated = inv * worst * T::TAU();
    Ok(QuadResult {
        value: res.value * inv,
        error_bound: res.error_bound * inv + propagated + truncation,
        panels_used: res.panels_used,
        tail_bound: truncation,
    })
}

/// Bound on `|4 I(d)|` for every shift `d`: `(4/γ) max(1/r₀, 1/(γ r₀))`.
fn pointwise_sup<T: Real>(gamma: T, chi: &CutoffChi<T>) -> T {
    T::lit(4.0) / gamma * chi.r0().recip().max((gamma * chi.r0()).recip())
}

/// Direct evaluation of `⟨w_{x,t}, φ⟩ = 4 ∬_{p,q>0} e^{-itq} cos(xp) cos(xq/γ) a(p, q) F[φ](q - p) dp dq`
/// with `a(p, q) = χ(p)χ(q/γ)/(γpq)`.
///
/// Outer integral over `d = q - p` on the window where `F[φ]` is not negligible; inner
/// integral over `p` by adaptive panels up to `Ξ_max` plus the exact Laurent tail of
/// `1/(p(p+d))`.
pub fn w_action_oracle<T: Real>(
    x: T,
    gamma: T,
    t: T,
    test: &GaussianTestFn<T>,
    chi: &CutoffChi<T>,
    params: &QuadParams<T>,
) -> Result<QuadResult<T>> {
    check_geometry(x, gamma)?;
    params.validate()?;
    let chi = *chi;
    let inner_tol = params.tol * T::lit(0.01);
    let slope = t.abs() + x.abs() * (T::one() + gamma.recip());
    let width = T::one().min(T::PI() / slope);
    let quarter = T::lit(0.25);
    let inner = |d: T| -> Result<(Complex<T>, T)> {
        let lo = chi.r0().max(gamma * chi.r0() - d);
        let from = chi.r1().max(gamma * chi.r1() - d);
        let xi_max = params.xi_max.max(T::lit(4.0) * from).max(T::lit(4.0) * d.abs());
        let cells = ((xi_max - lo) / width).ceil().to_usize().unwrap_or(1).max(1);
        let breaks: Vec<T> = (0..=cells)
            .map(|j| {
                if j == cells {
                    xi_max
                } else {
                    lo + (xi_max - lo) * T::from_usize_lossy(j) / T::from_usize_lossy(cells)
                }
            })
            .collect();
        let body = integrate_interval(
            |p| {
                let q = p + d;
                let a = chi.eval(p) * chi.eval(q / gamma);
                if a == T::zero() {
                    return Complex::new(T::zero(), T::zero());
                }
                T::cis(-t * q) * ((x * p).cos() * (x * q / gamma).cos() * a / (gamma * p * q))
            },
            &breaks,
            inner_tol,
            1 << 18,
        )?;
        let (m, remainder) = laurent_terms(d.abs(), gamma.recip(), xi_max, inner_tol * T::lit(1e-3));
        let mut tail = Complex::new(T::zero(), T::zero());
        for s1 in [T::one(), -T::one()] {
            for s2 in [T::one(), -T::one()] {
                let theta = -t + s1 * x + s2 * x / gamma;
                let weight = T::cis(-t * d + s2 * x * d / gamma) * quarter;
                let tails = oscillatory_power_tails(theta, xi_max, m + 1);
                let mut acc = Complex::new(T::zero(), T::zero());
                for j in 0..m {
                    acc = acc + tails[j + 1] * ((-d).powi(j as i32) / gamma);
                }
                tail = tail + weight * acc;
            }
        }
        let special = T::lit(64.0) * T::epsilon() * tail.norm().max(xi_max.recip());
        let value = (body.value + tail) * T::lit(4.0);
        Ok((value, T::lit(4.0) * (body.error_bound + remainder + special)))
    };
    let breaks = window_breaks(test.freq, test.width);
    let (res, worst) = integrate_fallible(
        |d| {
            let (v, e) = inner(d)?;
            Ok((v * test.fourier(d), e))
        },
        &breaks,
        params.tol * T::lit(0.5),
    )?;
    let truncation = pointwise_sup(gamma, &chi) * test.fourier_mass_outside(T::lit(WINDOW_SIGMAS));
    let propagated = worst * T::TAU();
    Ok(QuadResult {
        value: res.value,
        error_bound: res.error_bound + propagated + truncation,
        panels_used: res.panels_used,
        tail_bound: truncation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (CutoffChi<f64>, QuadParams<f64>) {
        (CutoffChi::default(), QuadParams::default())
    }

    #[test]
    fn conjugate_symmetry_in_t() {
        let (chi, params) = setup();
        let c = OiCorrelator::new(1.0, 2.0, &chi, 3.0, &params).unwrap();
        for t in [0.3, 1.1, 2.7] {
            let a = c.eval(t).unwrap();
            let b = c.eval(-t).unwrap();
            assert!((a.value - b.value.conj()).norm() <= a.error_bound + b.error_bound);
        }
        assert!(c.eval(3.5).is_err());
    }

    #[test]
    fn ft_w_at_zero_is_the_correlation() {
        let (chi, params) = setup();
        let c = OiCorrelator::new(1.0, 2.0, &chi, 3.0, &params).unwrap();
        for t in [-1.3, 0.2] {
            let a = c.eval(t).unwrap();
            let b = ft_w(1.0, 2.0, t, 0.0, &chi, &params).unwrap();
            assert!((a.value - b.value).norm() <= a.error_bound + b.error_bound);
        }
    }

    #[test]
    fn ft_w_decays_in_r() {
        let (chi, params) = setup();
        let m: Vec<f64> =
            [1.0, 10.0, 100.0].iter().map(|&r| ft_w(1.0, 2.0, 0.2, r, &chi, &params).unwrap().value.norm()).collect();
        assert!(m[0] > m[1] && m[1] > m[2], "{m:?}");
    }

    #[test]
    fn rejects_bad_geometry() {
        let (chi, params) = setup();
        assert!(OiCorrelator::new(0.0, 2.0, &chi, 1.0, &params).is_err());
        assert!(OiCorrelator::new(1.0, -2.0, &chi, 1.0, &params).is_err());
    }

    #[test]
    fn gaussian_test_fn_transform() {
        let g = GaussianTestFn::new(0.3, 0.7, 1.5).unwrap();
        // F[φ](k) = ∫ φ(s) e^{-iks} ds by trapezoid on a wide grid.
        for k in [-1.0, 0.5, 2.0] {
            let h = 1e-3;
            let mut acc = Complex::new(0.0, 0.0);
            for j in -10000..=10000 {
                let s = 0.3 + j as f64 * h;
                acc += g.eval(s) * f64::cis(-k * s) * h;
            }
            assert!((acc - g.fourier(k)).norm() < 1e-12);
        }
    }
}
