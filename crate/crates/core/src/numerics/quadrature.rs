#![allow(clippy::excessive_precision)]

//! Panel quadrature with embedded error estimates.
//!
//! Every panel is integrated with the 15-point Kronrod rule; the embedded 7-point Gauss rule
//! gives the per-panel estimate `|K - G|`. Reported bounds add a roundoff term and, on the
//! half line, the truncation tail.

use num_complex::Complex;

use super::special::oscillatory_power_tails;
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the odd-indexed Kronrod abscissae 1, 3, 5, 7.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Nodes and weights of one G7-K15 panel on `[a, b]`: `(node, kronrod weight, gauss weight)`.
pub(crate) fn gk15_panel<T: Real>(a: T, b: T) -> [(T, T, T); 15] {
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    let mut out = [(T::zero(), T::zero(), T::zero()); 15];
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let wg = if j % 2 == 1 { half * T::lit(WG[j / 2]) } else { T::zero() };
        let wk = half * T::lit(WGK[j]);
        out[2 * j] = (mid - dx, wk, wg);
        out[2 * j + 1] = (mid + dx, wk, wg);
    }
    out[14] = (mid, half * T::lit(WGK[7]), half * T::lit(WG[3]));
    out
}

/// Outcome of a quadrature: value with an absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: Complex<T>,
    /// Absolute bound on `|value - truth|`; includes `tail_bound`.
    pub error_bound: T,
    pub panels_used: usize,
    /// Part of `error_bound` owed to truncating an infinite domain.
    pub tail_bound: T,
}

/// Controls for the half-line oscillatory quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadParams<T> {
    /// Truncation point `Ξ_max` of the numerically integrated range.
    pub xi_max: T,
    pub tol: T,
    pub max_panels: usize,
}

impl<T: Real> Default for QuadParams<T> {
    fn default() -> Self {
        Self { xi_max: T::lit(1e3), tol: T::lit(1e-8), max_panels: 400_000 }
    }
}

impl<T: Real> QuadParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > T::zero()) {
            return Err(invalid("quadrature tolerance must be positive"));
        }
        if !(self.xi_max > T::zero()) || !self.xi_max.is_finite() {
            return Err(invalid("xi_max must be positive and finite"));
        }
        if self.max_panels == 0 {
            return Err(invalid("panel budget must be nonzero"));
        }
        Ok(())
    }
}

fn panel_sum<T: Real, F: Fn(T) -> Complex<T>>(f: &F, a: T, b: T) -> (Complex<T>, T, T) {
    let mut k = Complex::new(T::zero(), T::zero());
    let mut g = k;
    let mut abs_sum = T::zero();
    for (x, wk, wg) in gk15_panel(a, b) {
        let v = f(x);
        k = k + v * wk;
        g = g + v * wg;
        abs_sum = abs_sum + v.norm() * wk;
    }
    (k, (k - g).norm(), abs_sum)
}

fn roundoff<T: Real>(abs_sum: T) -> T {
    T::lit(50.0) * T::epsilon() * abs_sum
}

/// Adaptive integration of a smooth complex function over `[breaks[0], breaks[last]]`.
///
/// `breaks` must be strictly increasing; interior entries seed the initial panels (place
/// them at kinks or support edges). A panel is accepted once `|K - G|` is below its
/// length-proportional share of `tol` or at the roundoff floor.
pub fn integrate_interval<T: Real, F: Fn(T) -> Complex<T>>(
    f: F,
    breaks: &[T],
    tol: T,
    max_panels: usize,
) -> Result<QuadResult<T>> {
    if breaks.len() < 2 {
        return Err(invalid("integrate_interval needs at least two break points"));
    }
    if breaks.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("break points must be strictly increasing"));
    }
    let len = breaks[breaks.len() - 1] - breaks[0];
    let mut stack: Vec<(T, T)> = breaks.windows(2).rev().map(|w| (w[0], w[1])).collect();
    let mut value = Complex::new(T::zero(), T::zero());
    let mut err = T::zero();
    let mut panels = 0usize;
    while let Some((a, b)) = stack.pop() {
        let (k, e, abs_sum) = panel_sum(&f, a, b);
        let floor = roundoff(abs_sum);
        let share = tol * (b - a) / len * T::lit(0.5);
        let mid = (a + b) * T::lit(0.5);
        let splittable = mid > a && mid < b;
        if e <= share || e <= floor || !splittable || panels + stack.len() + 2 > max_panels {
            value = value + k;
            err = err + e + floor;
            panels += 1;
        } else {
            stack.push((mid, b));
            stack.push((a, mid));
        }
    }
    let result = QuadResult { value, error_bound: err, panels_used: panels, tail_bound: T::zero() };
    if err > tol {
        return Err(Error::ToleranceUnreachable {
            tol: tol.as_f64(),
            bound: err.as_f64(),
            context: format!("finite interval, {panels} panels"),
        });
    }
    Ok(result)
}

/// Term `weight · e^{i·freq·ξ}` of an oscillatory factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase<T> {
    pub weight: Complex<T>,
    pub freq: T,
}

impl<T: Real> Phase<T> {
    pub fn new(weight: Complex<T>, freq: T) -> Self {
        Self { weight, freq }
    }

    pub fn real(weight: T, freq: T) -> Self {
        Self { weight: Complex::new(weight, T::zero()), freq }
    }
}

/// What is known about the amplitude beyond the truncation point.
#[derive(Debug, Clone, PartialEq)]
pub enum TailModel<T> {
    /// Only a decay bound: `|A(ξ)| ≤ constant · ξ^{-k}` for `ξ ≥ Ξ_max`.
    Bounded { constant: T },
    /// Exact expansion `A(ξ) = Σ_m coeffs[m] ξ^{-(k+m)}` for `ξ ≥ from`, with the
    /// neglected coefficients bounded by `remainder_constant · ratio^m`.
    Laurent { from: T, coeffs: Vec<T>, remainder_constant: T, ratio: T },
}

/// Real amplitude of decay order `k` supported in `[support_start, ∞)`.
pub struct DecayingAmplitude<'a, T> {
    pub eval: &'a (dyn Fn(T) -> T + Sync),
    pub decay_order: u32,
    pub support_start: T,
    pub tail: TailModel<T>,
}

/// Integration domain for [`integrate_decaying_oscillatory`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain<T> {
    /// `[start, ∞)` with `start ≥ 0`.
    HalfLine { start: T },
    /// `(-∞, ∞)` for an even amplitude; folded onto `[0, ∞)`.
    Symmetric,
}

/// Half-line rule with fixed nodes for `∫ A(ξ) M(ξ) e^{iνξ} dξ`, where the amplitude `A`
/// and modulation `M(ξ) = Σ_j w_j e^{iθ_j ξ}` are frozen at preparation and only the
/// carrier `ν` varies between calls.
#[derive(Debug, Clone)]
pub struct OscillatoryRule<T> {
    nodes: Vec<T>,
    kronrod: Vec<T>,
    gauss: Vec<T>,
    weighted: Vec<Complex<T>>,
    panels: usize,
    xi_max: T,
    decay_order: u32,
    tail: TailModel<T>,
    modulation: Vec<Phase<T>>,
}

impl<T: Real> OscillatoryRule<T> {
    /// Builds panels on `[lo, Ξ_max]` no wider than half the wavelength of the fastest
    /// oscillation (`|carrier| ≤ carrier_max` plus the modulation frequencies), then bisects
    /// panels whose embedded estimate at the extreme carriers exceeds their share of `tol`.
    pub fn prepare(
        amplitude: &DecayingAmplitude<'_, T>,
        lo: T,
        modulation: &[Phase<T>],
        carrier_max: T,
        params: &QuadParams<T>,
    ) -> Result<Self> {
        params.validate()?;
        if amplitude.decay_order < 2 {
            return Err(invalid("amplitude decay order must be at least 2"));
        }
        if let TailModel::Laurent { from, ratio, .. } = &amplitude.tail {
            if params.xi_max < *from {
                return Err(invalid("xi_max lies before the exact tail expansion starts"));
            }
            if !(*ratio < params.xi_max) {
                return Err(invalid("tail expansion does not converge at xi_max"));
            }
        }
        let lo = lo.max(amplitude.support_start).max(T::zero());
        let xi_max = params.xi_max;
        if !(lo < xi_max) {
            return Err(invalid("support starts beyond xi_max"));
        }
        let mod_max = modulation.iter().fold(T::zero(), |m, p| m.max(p.freq.abs()));
        let slope = carrier_max.abs() + mod_max;
        let mut width = T::one();
        if slope > T::zero() {
            width = width.min(T::PI() / slope);
        }
        let m_eval = |x: T| {
            modulation.iter().fold(Complex::new(T::zero(), T::zero()), |acc, p| acc + p.weight * T::cis(p.freq * x))
        };
        let f = |x: T| -> Complex<T> { m_eval(x) * (amplitude.eval)(x) };
        let probe = [-carrier_max, T::zero(), carrier_max];
        let span = xi_max - lo;

        let n0 = (span / width).ceil().to_usize().unwrap_or(1).max(1);
        let mut stack: Vec<(T, T)> = (0..n0)
            .rev()
            .map(|i| {
                let a = lo + span * T::from_usize_lossy(i) / T::from_usize_lossy(n0);
                let b =
                    if i + 1 == n0 { xi_max } else { lo + span * T::from_usize_lossy(i + 1) / T::from_usize_lossy(n0) };
                (a, b)
            })
            .collect();
        let mut accepted: Vec<(T, T)> = Vec::with_capacity(n0);
        while let Some((a, b)) = stack.pop() {
            let mut worst = T::zero();
            let mut floor = T::zero();
            for &nu in &probe {
                let g = |x: T| f(x) * T::cis(nu * x);
                let (_, e, abs_sum) = panel_sum(&g, a, b);
                worst = worst.max(e);
                floor = floor.max(roundoff(abs_sum));
            }
            let share = params.tol * (b - a) / span * T::lit(0.25);
            let mid = (a + b) * T::lit(0.5);
            if worst <= share || worst <= floor || !(mid > a && mid < b) {
                accepted.push((a, b));
            } else if accepted.len() + stack.len() + 2 > params.max_panels {
                return Err(Error::ToleranceUnreachable {
                    tol: params.tol.as_f64(),
                    bound: worst.as_f64(),
                    context: format!("panel budget {} exhausted on [{lo}, {xi_max}]", params.max_panels),
                });
            } else {
                stack.push((mid, b));
                stack.push((a, mid));
            }
        }

        let mut nodes = Vec::with_capacity(accepted.len() * 15);
        let mut kronrod = Vec::with_capacity(accepted.len() * 15);
        let mut gauss = Vec::with_capacity(accepted.len() * 15);
        let mut weighted = Vec::with_capacity(accepted.len() * 15);
        for &(a, b) in &accepted {
            for (x, wk, wg) in gk15_panel(a, b) {
                nodes.push(x);
                kronrod.push(wk);
                gauss.push(wg);
                weighted.push(f(x));
            }
        }
        Ok(Self {
            nodes,
            kronrod,
            gauss,
            weighted,
            panels: accepted.len(),
            xi_max,
            decay_order: amplitude.decay_order,
            tail: amplitude.tail.clone(),
            modulation: modulation.to_vec(),
        })
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    /// Integrates with carrier `e^{i·carrier·ξ}` over `[lo, ∞)`.
    pub fn integrate(&self, carrier: T) -> QuadResult<T> {
        let zero = Complex::new(T::zero(), T::zero());
        let mut value = zero;
        let mut err = T::zero();
        for p in 0..self.panels {
            let mut k = zero;
            let mut g = zero;
            let mut abs_sum = T::zero();
            for j in 15 * p..15 * (p + 1) {
                let v = self.weighted[j] * T::cis(carrier * self.nodes[j]);
                k = k + v * self.kronrod[j];
                g = g + v * self.gauss[j];
                abs_sum = abs_sum + v.norm() * self.kronrod[j];
            }
            value = value + k;
            err = err + (k - g).norm() + roundoff(abs_sum);
        }
        let (tail_value, tail_bound) = self.tail_contribution(carrier);
        QuadResult { value: value + tail_value, error_bound: err + tail_bound, panels_used: self.panels, tail_bound }
    }

    fn tail_contribution(&self, carrier: T) -> (Complex<T>, T) {
        let k = self.decay_order as usize;
        let xi = self.xi_max;
        let weight_sum = self.modulation.iter().fold(T::zero(), |s, p| s + p.weight.norm());
        match &self.tail {
            TailModel::Bounded { constant } => {
                let km1 = T::from_usize_lossy(k - 1);
                (Complex::new(T::zero(), T::zero()), *constant * weight_sum * xi.powf(-km1) / km1)
            }
            TailModel::Laurent { coeffs, remainder_constant, ratio, .. } => {
                let mut value = Complex::new(T::zero(), T::zero());
                let max_order = k + coeffs.len().max(1) - 1;
                for p in &self.modulation {
                    let tails = oscillatory_power_tails(p.freq + carrier, xi, max_order);
                    let mut s = Complex::new(T::zero(), T::zero());
                    for (m, c) in coeffs.iter().enumerate() {
                        s = s + tails[k + m - 1] * *c;
                    }
                    value = value + p.weight * s;
                }
                let m = coeffs.len();
                let order = T::from_usize_lossy(k + m - 1);
                let remainder =
                    *remainder_constant * ratio.powi(m as i32) * xi.powf(-order) / (order * (T::one() - *ratio / xi));
                let special = T::lit(64.0) * T::epsilon() * value.norm().max(xi.recip());
                (value, weight_sum * remainder + special)
            }
        }
    }
}

/// `∫ A(ξ) Σ_j w_j e^{iθ_j ξ} dξ` over a half line or the whole line, for an amplitude of
/// decay order `k ≥ 2`.
///
/// Panels on `[start, Ξ_max]` are at most half an oscillation wavelength wide; beyond
/// `Ξ_max` the tail is either evaluated exactly from a Laurent expansion or bounded by
/// `C Ξ_max^{1-k}/(k-1)`. Fails when the total bound exceeds `params.tol`.
pub fn integrate_decaying_oscillatory<T: Real>(
    amplitude: &DecayingAmplitude<'_, T>,
    phases: &[Phase<T>],
    domain: Domain<T>,
    params: &QuadParams<T>,
) -> Result<QuadResult<T>> {
    let (lo, modulation) = match domain {
        Domain::HalfLine { start } => {
            if start < T::zero() {
                return Err(invalid("half-line start must be nonnegative"));
            }
            (start, phases.to_vec())
        }
        Domain::Symmetric => {
            let mut folded = Vec::with_capacity(2 * phases.len());
            for p in phases {
                folded.push(*p);
                folded.push(Phase::new(p.weight, -p.freq));
            }
            (T::zero(), folded)
        }
    };
    let rule = OscillatoryRule::prepare(amplitude, lo, &modulation, T::zero(), params)?;
    let result = rule.integrate(T::zero());
    if result.error_bound > params.tol {
        return Err(Error::ToleranceUnreachable {
            tol: params.tol.as_f64(),
            bound: result.error_bound.as_f64(),
            context: format!("tail bound {:e} at xi_max = {}", result.tail_bound.as_f64(), params.xi_max.as_f64()),
        });
    }
    Ok(result)
}
