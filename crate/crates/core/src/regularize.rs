//! Mollifiers, the frequency cutoff `χ`, and sampling of regularized traces.

use num_complex::Complex;

use crate::error::{invalid, Result};
use crate::numerics::integrate_interval;
use crate::numerics::special::normal_cdf;
use crate::scalar::Real;
use crate::traces::{StationTrace, TraceKind};

fn bump_tol<T: Real>() -> T {
    T::lit(1e-14).max(T::lit(1e3) * T::epsilon())
}

/// Unnormalized `exp(-1/(1-s²))` on `|s| < 1`.
fn bump_raw<T: Real>(s: T) -> T {
    let q = T::one() - s * s;
    if q <= T::zero() {
        T::zero()
    } else {
        (-q.recip()).exp()
    }
}

fn bump_mass<T: Real>(a: T, b: T) -> T {
    let a = a.max(-T::one());
    let b = b.min(T::one());
    if !(b > a) {
        return T::zero();
    }
    integrate_interval(|s| Complex::new(bump_raw(s), T::zero()), &[a, b], bump_tol(), 4096)
        .expect("bump integrand is smooth and bounded")
        .value
        .re
}

/// `∫_{-1}^{s}` of the normalized bump, given its total mass `z`.
fn bump_cdf<T: Real>(s: T, z: T) -> T {
    if s <= -T::one() {
        T::zero()
    } else if s >= T::one() {
        T::one()
    } else if s <= T::zero() {
        bump_mass(-T::one(), s) / z
    } else {
        T::one() - bump_mass(-T::one(), -s) / z
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MollifierKind {
    /// `(2π)^{-1/2} e^{-s²/2}`.
    Gaussian,
    /// `exp(-1/(1-s²))/Z` on `|s| < 1`.
    CompactBump,
}

/// Even mollifier `ρ` with `∫ρ = 1`; the rescaled kernel is `ρ_ε(s) = ρ(s/ε)/ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mollifier<T> {
    kind: MollifierKind,
    norm: T,
}

impl<T: Real> Mollifier<T> {
    pub fn new(kind: MollifierKind) -> Self {
        let norm = match kind {
            MollifierKind::Gaussian => T::one(),
            MollifierKind::CompactBump => bump_mass(-T::one(), T::one()),
        };
        Self { kind, norm }
    }

    pub fn gaussian() -> Self {
        Self::new(MollifierKind::Gaussian)
    }

    pub fn compact_bump() -> Self {
        Self::new(MollifierKind::CompactBump)
    }

    pub fn kind(&self) -> MollifierKind {
        self.kind
    }

    pub fn is_even(&self) -> bool {
        true
    }

    /// Radius of the support, `None` for unbounded support.
    pub fn support_radius(&self) -> Option<T> {
        match self.kind {
            MollifierKind::Gaussian => None,
            MollifierKind::CompactBump => Some(T::one()),
        }
    }

    /// Half-width beyond which `ρ` is below double-precision relevance.
    pub fn effective_radius(&self) -> T {
        self.support_radius().unwrap_or(T::lit(40.0))
    }

    pub fn rho(&self, s: T) -> T {
        match self.kind {
            MollifierKind::Gaussian => (-(s * s) * T::lit(0.5)).exp() / (T::TAU()).sqrt(),
            MollifierKind::CompactBump => bump_raw(s) / self.norm,
        }
    }

    pub fn rho_prime(&self, s: T) -> T {
        match self.kind {
            MollifierKind::Gaussian => -s * self.rho(s),
            MollifierKind::CompactBump => {
                let q = T::one() - s * s;
                if q <= T::zero() {
                    return T::zero();
                }
                self.rho(s) * (-T::lit(2.0) * s / (q * q))
            }
        }
    }

    pub fn rho_second(&self, s: T) -> T {
        match self.kind {
            MollifierKind::Gaussian => (s * s - T::one()) * self.rho(s),
            MollifierKind::CompactBump => {
                let q = T::one() - s * s;
                if q <= T::zero() {
                    return T::zero();
                }
                let s2 = s * s;
                let q2 = q * q;
                let factor = T::lit(4.0) * s2 / (q2 * q2) - T::lit(2.0) / q2 - T::lit(8.0) * s2 / (q2 * q);
                self.rho(s) * factor
            }
        }
    }

    /// `∫_{-∞}^{s} ρ`.
    pub fn cdf(&self, s: T) -> T {
        match self.kind {
            MollifierKind::Gaussian => normal_cdf(s),
            MollifierKind::CompactBump => bump_cdf(s, self.norm),
        }
    }

    pub fn scaled(&self, s: T, eps: T) -> T {
        self.rho(s / eps) / eps
    }

    fn overlap(&self, k: T, g: impl Fn(T) -> T) -> T {
        let r = self.effective_radius();
        let a = (-r).max(-r - k);
        let b = r.min(r - k);
        if !(b > a) {
            return T::zero();
        }
        let mut breaks = vec![a];
        let mid = -k * T::lit(0.5);
        if mid > a && mid < b {
            breaks.push(mid);
        }
        breaks.push(b);
        integrate_interval(|s| Complex::new(self.rho(s) * g(s + k), T::zero()), &breaks, bump_tol(), 1 << 16)
            .expect("mollifier overlap integrand is smooth")
            .value
            .re
    }

    /// `∫ρ(s)ρ(s + k) ds`.
    pub fn autocorrelation(&self, k: T) -> T {
        match self.kind {
            MollifierKind::Gaussian => gaussian_autocorrelation(k),
            MollifierKind::CompactBump => self.overlap(k, |s| self.rho(s)),
        }
    }

    /// `∫ρ(s)ρ'(s + k) ds`, the k-derivative of [`Self::autocorrelation`].
    pub fn autocorrelation_d1(&self, k: T) -> T {
        match self.kind {
            MollifierKind::Gaussian => -(k * T::lit(0.5)) * gaussian_autocorrelation(k),
            MollifierKind::CompactBump => self.overlap(k, |s| self.rho_prime(s)),
        }
    }

    /// `∫ρ(s)ρ''(s + k) ds`.
    pub fn autocorrelation_d2(&self, k: T) -> T {
        match self.kind {
            MollifierKind::Gaussian => (k * k * T::lit(0.25) - T::lit(0.5)) * gaussian_autocorrelation(k),
            MollifierKind::CompactBump => self.overlap(k, |s| self.rho_second(s)),
        }
    }

    /// `∫ρ(s)·cdf(s + k) ds`.
    pub fn smoothed_cdf(&self, k: T) -> T {
        match self.kind {
            MollifierKind::Gaussian => normal_cdf(k / T::SQRT_2()),
            MollifierKind::CompactBump => {
                let r = T::one();
                if k >= r + r {
                    return T::one();
                }
                if k <= -(r + r) {
                    return T::zero();
                }
                integrate_interval(
                    |s| Complex::new(self.rho(s) * self.cdf(s + k), T::zero()),
                    &[-r, r],
                    bump_tol(),
                    1 << 16,
                )
                .expect("smoothed cdf integrand is smooth")
                .value
                .re
            }
        }
    }

    /// Numerical `∫ρ` over the effective support.
    pub fn normalization(&self) -> T {
        let r = self.effective_radius();
        integrate_interval(|s| Complex::new(self.rho(s), T::zero()), &[-r, T::zero(), r], bump_tol(), 1 << 16)
            .expect("mollifier is smooth")
            .value
            .re
    }

    /// Sampled constants `C_k = max |ρ(s)|(1+|s|)^k` for `k = 0..=max_order` over `[0, s_max]`.
    pub fn decay_constants(&self, max_order: u32, s_max: T, samples: usize) -> Vec<T> {
        let mut c = vec![T::zero(); max_order as usize + 1];
        for i in 0..=samples {
            let s = s_max * T::from_usize_lossy(i) / T::from_usize_lossy(samples.max(1));
            let v = self.rho(s).abs();
            let mut w = v;
            for ck in c.iter_mut() {
                *ck = ck.max(w);
                w = w * (T::one() + s);
            }
        }
        c
    }
}

fn gaussian_autocorrelation<T: Real>(k: T) -> T {
    (-(k * k) * T::lit(0.25)).exp() / (T::lit(2.0) * T::PI().sqrt())
}

/// Even cutoff with `χ = 0` on `|ξ| ≤ r₀` and `χ = 1` on `|ξ| ≥ r₁`; the transition is the
/// normalized bump cumulative rescaled to `[r₀, r₁]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffChi<T> {
    r0: T,
    r1: T,
    norm: T,
}

impl<T: Real> CutoffChi<T> {
    pub fn new(r0: T, r1: T) -> Result<Self> {
        if !(r0 > T::zero()) || !(r1 > r0) || !r1.is_finite() {
            return Err(invalid(format!("cutoff radii must satisfy 0 < r0 < r1, got r0 = {r0}, r1 = {r1}")));
        }
        Ok(Self { r0, r1, norm: bump_mass(-T::one(), T::one()) })
    }

    pub fn r0(&self) -> T {
        self.r0
    }

    pub fn r1(&self) -> T {
        self.r1
    }

    pub fn eval(&self, xi: T) -> T {
        let a = xi.abs();
        if a <= self.r0 {
            T::zero()
        } else if a >= self.r1 {
            T::one()
        } else {
            let s = T::lit(2.0) * (a - self.r0) / (self.r1 - self.r0) - T::one();
            bump_cdf(s, self.norm)
        }
    }
}

impl<T: Real> Default for CutoffChi<T> {
    fn default() -> Self {
        Self::new(T::lit(0.5), T::one()).expect("default radii are valid")
    }
}

pub fn cutoff_eval<T: Real>(chi: &CutoffChi<T>, xi: T) -> T {
    chi.eval(xi)
}

/// Uniform grid of `n ≥ 2` points on `[t_min, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T> {
    pub t_min: T,
    pub t_max: T,
    pub n: usize,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(t_min: T, t_max: T, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(invalid("a time grid needs at least two points"));
        }
        if !(t_max > t_min) || !t_min.is_finite() || !t_max.is_finite() {
            return Err(invalid(format!("time grid bounds must be finite with t_min < t_max, got [{t_min}, {t_max}]")));
        }
        Ok(Self { t_min, t_max, n })
    }

    /// Grid on `[t_min, t_max]` whose spacing does not exceed `dt`.
    pub fn with_spacing(t_min: T, t_max: T, dt: T) -> Result<Self> {
        if !(dt > T::zero()) {
            return Err(invalid("grid spacing must be positive"));
        }
        let cells = ((t_max - t_min) / dt).ceil().to_usize().unwrap_or(1).max(1);
        Self::new(t_min, t_max, cells + 1)
    }

    pub fn spacing(&self) -> T {
        (self.t_max - self.t_min) / T::from_usize_lossy(self.n - 1)
    }

    pub fn point(&self, i: usize) -> T {
        if i + 1 == self.n {
            return self.t_max;
        }
        self.t_min + (self.t_max - self.t_min) * T::from_usize_lossy(i) / T::from_usize_lossy(self.n - 1)
    }

    pub fn points(&self) -> Vec<T> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    /// Index of the grid point nearest to `t`, clamped to the grid.
    pub fn nearest_index(&self, t: T) -> usize {
        let u = ((t - self.t_min) / self.spacing()).round();
        if u <= T::zero() {
            0
        } else {
            u.to_usize().unwrap_or(self.n - 1).min(self.n - 1)
        }
    }
}

/// Complex samples on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal<T> {
    pub grid: TimeGrid<T>,
    pub values: Vec<Complex<T>>,
    /// Set when the grid spacing exceeds half the mollification width.
    pub coarse_grid: bool,
}

impl<T: Real> SampledSignal<T> {
    pub fn new(grid: TimeGrid<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(invalid(format!("{} samples for a grid of {} points", values.len(), grid.n)));
        }
        Ok(Self { grid, values, coarse_grid: false })
    }

    pub fn from_fn(grid: TimeGrid<T>, f: impl Fn(T) -> Complex<T>) -> Self {
        let values = grid.points().into_iter().map(f).collect();
        Self { grid, values, coarse_grid: false }
    }

    pub fn spacing(&self) -> T {
        self.grid.spacing()
    }

    /// Rectangle-rule `Σ φ(t_i) s(t_i) Δt`.
    pub fn pair_with(&self, phi: impl Fn(T) -> T) -> Complex<T> {
        let dt = self.spacing();
        self.grid
            .points()
            .into_iter()
            .zip(&self.values)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (t, v)| acc + *v * (phi(t) * dt))
    }
}

/// Samples `trace * ρ_ε` on `grid`: atoms become scaled kernels, jumps use the exact
/// cumulative of `ρ`.
pub fn mollify_trace<T: Real>(
    trace: &StationTrace<T>,
    rho: &Mollifier<T>,
    eps: T,
    grid: &TimeGrid<T>,
) -> Result<SampledSignal<T>> {
    if !(eps > T::zero()) || !eps.is_finite() {
        return Err(invalid("mollification width must be positive"));
    }
    let mut out = match trace.kind {
        TraceKind::Atom { location, weight } => {
            SampledSignal::from_fn(*grid, |t| Complex::new(weight * rho.scaled(t - location, eps), T::zero()))
        }
        TraceKind::Jump { location, left, right } => SampledSignal::from_fn(*grid, |t| {
            Complex::new(left + (right - left) * rho.cdf((t - location) / eps), T::zero())
        }),
        TraceKind::OI { .. } => {
            return Err(invalid("oscillatory traces are regularized spectrally, not sampled"));
        }
    };
    out.coarse_grid = grid.spacing() > eps * T::lit(0.5);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn normalization_of_both_kinds() {
        assert_abs_diff_eq!(Mollifier::<f64>::gaussian().normalization(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(Mollifier::<f64>::compact_bump().normalization(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn bump_mass_reference() {
        // ∫_{-1}^{1} exp(-1/(1-s²)) ds = 0.443993816168079...
        assert_abs_diff_eq!(bump_mass(-1.0_f64, 1.0), 0.443_993_816_168_079_4, epsilon = 1e-14);
    }

    #[test]
    fn derivatives_match_differences() {
        for rho in [Mollifier::<f64>::gaussian(), Mollifier::compact_bump()] {
            for s in [-0.7, -0.2, 0.1, 0.55] {
                let h = 1e-5;
                let d1 = (rho.rho(s + h) - rho.rho(s - h)) / (2.0 * h);
                let d2 = (rho.rho_prime(s + h) - rho.rho_prime(s - h)) / (2.0 * h);
                assert_abs_diff_eq!(rho.rho_prime(s), d1, epsilon = 1e-7);
                assert_abs_diff_eq!(rho.rho_second(s), d2, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn bump_autocorrelation_derivatives() {
        let rho = Mollifier::<f64>::compact_bump();
        let h = 1e-5;
        for k in [-0.8, 0.0, 0.3, 1.2] {
            let d1 = (rho.autocorrelation(k + h) - rho.autocorrelation(k - h)) / (2.0 * h);
            assert_abs_diff_eq!(rho.autocorrelation_d1(k), d1, epsilon = 1e-7);
            let d2 = (rho.autocorrelation_d1(k + h) - rho.autocorrelation_d1(k - h)) / (2.0 * h);
            assert_abs_diff_eq!(rho.autocorrelation_d2(k), d2, epsilon = 1e-5);
        }
        assert_eq!(rho.autocorrelation(2.5), 0.0);
    }

    #[test]
    fn gaussian_square_integral() {
        let rho = Mollifier::<f64>::gaussian();
        assert_abs_diff_eq!(rho.autocorrelation(0.0), 0.5 / std::f64::consts::PI.sqrt(), epsilon = 1e-16);
    }

    #[test]
    fn cdf_is_consistent() {
        for rho in [Mollifier::<f64>::gaussian(), Mollifier::compact_bump()] {
            assert_abs_diff_eq!(rho.cdf(0.0), 0.5, epsilon = 1e-14);
            assert_abs_diff_eq!(rho.cdf(0.3) + rho.cdf(-0.3), 1.0, epsilon = 1e-14);
            let h = 1e-5;
            assert_abs_diff_eq!((rho.cdf(0.4 + h) - rho.cdf(0.4 - h)) / (2.0 * h), rho.rho(0.4), epsilon = 1e-8);
            assert_abs_diff_eq!(rho.smoothed_cdf(0.0), 0.5, epsilon = 1e-13);
        }
    }

    #[test]
    fn decay_constants_are_finite() {
        for rho in [Mollifier::<f64>::gaussian(), Mollifier::compact_bump()] {
            let c = rho.decay_constants(6, 60.0, 6000);
            assert!(c.iter().all(|v| v.is_finite() && *v > 0.0));
        }
    }

    #[test]
    fn cutoff_plateaus_and_evenness() {
        let chi = CutoffChi::<f64>::default();
        assert_eq!(cutoff_eval(&chi, 0.25), 0.0);
        assert_eq!(cutoff_eval(&chi, -3.0), 1.0);
        assert_eq!(chi.eval(0.75), chi.eval(-0.75));
        assert_abs_diff_eq!(chi.eval(0.75), 0.5, epsilon = 1e-14);
        let mut prev = 0.0;
        for i in 0..=200 {
            let v = chi.eval(0.5 + 0.5 * i as f64 / 200.0);
            assert!(v >= prev);
            prev = v;
        }
        assert!(CutoffChi::new(1.0_f64, 0.5).is_err());
    }

    #[test]
    fn mollified_atom_value() {
        let trace = StationTrace::atom(1.0, 0.5, 0.5).unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 1001).unwrap();
        let s = mollify_trace(&trace, &Mollifier::gaussian(), 0.1, &grid).unwrap();
        assert_abs_diff_eq!(s.values[500].re, 1.994_711_402_007_163_5, epsilon = 1e-12);
        assert!(!s.coarse_grid);
    }

    #[test]
    fn mollified_jump_midpoint() {
        let trace = StationTrace::jump(1.0, 0.5, 1.0, 0.0).unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 101).unwrap();
        let s = mollify_trace(&trace, &Mollifier::gaussian(), 0.01, &grid).unwrap();
        assert_abs_diff_eq!(s.values[0].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.values[50].re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.values[100].re, 0.0, epsilon = 1e-12);
        assert!(s.coarse_grid);
    }

    #[test]
    fn rejects_bad_width() {
        let trace = StationTrace::atom(1.0, 0.5, 0.5).unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 11).unwrap();
        assert!(mollify_trace(&trace, &Mollifier::gaussian(), 0.0, &grid).is_err());
    }
}
