//! Time-shift extraction: prediction from phase functions, the correlation-stationarity
//! criterion, singular-support labelling and the implicit γ-sweep.

use crate::correlate::CorrelationCurve;
use crate::detect::DetectionReport;
use crate::error::{invalid, Error, Result};
use crate::numerics::{bisect, central_difference, newton_1d};
use crate::regularize::Mollifier;
use crate::scalar::{signum0, Real};

/// Phase `φ₀(x, η, ρ)`, positively homogeneous of degree 1 in `(η, ρ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseModel<T> {
    /// `s·x·|ρ|`; a plane wave of slowness `s` with no `η`.
    Plane { slowness: T },
    /// `x·√(η² + s²ρ²) - b·η`.
    Hyperbolic { slowness: T, offset: T },
}

impl<T: Real> PhaseModel<T> {
    pub fn value(&self, x: T, eta: T, rho: T) -> T {
        match *self {
            Self::Plane { slowness } => slowness * x * rho.abs(),
            Self::Hyperbolic { slowness, offset } => x * eta.hypot(slowness * rho) - offset * eta,
        }
    }

    pub fn d_eta(&self, x: T, eta: T, rho: T) -> T {
        match *self {
            Self::Plane { .. } => T::zero(),
            Self::Hyperbolic { slowness, offset } => x * eta / eta.hypot(slowness * rho) - offset,
        }
    }

    pub fn d_eta2(&self, x: T, eta: T, rho: T) -> T {
        match *self {
            Self::Plane { .. } => T::zero(),
            Self::Hyperbolic { slowness, .. } => {
                let a = slowness * rho;
                let n = eta.hypot(a);
                x * a * a / (n * n * n)
            }
        }
    }

    pub fn d_rho(&self, x: T, eta: T, rho: T) -> T {
        match *self {
            Self::Plane { slowness } => slowness * x * signum0(rho),
            Self::Hyperbolic { slowness, .. } => x * slowness * slowness * rho / eta.hypot(slowness * rho),
        }
    }

    pub fn has_eta(&self) -> bool {
        matches!(self, Self::Hyperbolic { .. })
    }
}

/// Background phase `φ₀` and perturbed phase `ψ₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePair<T> {
    pub background: PhaseModel<T>,
    pub perturbed: PhaseModel<T>,
    /// Newton seeds for the stationary `η` of each phase.
    pub eta_seeds: (T, T),
}

impl<T: Real> PhasePair<T> {
    /// Plane OI pair with slownesses `1` and `1/γ`.
    pub fn plane(gamma: T) -> Result<Self> {
        if !(gamma > T::zero()) {
            return Err(invalid("gamma must be positive"));
        }
        Ok(Self {
            background: PhaseModel::Plane { slowness: T::one() },
            perturbed: PhaseModel::Plane { slowness: gamma.recip() },
            eta_seeds: (T::zero(), T::zero()),
        })
    }

    /// Hyperbolic pair sharing the offset `b`.
    pub fn hyperbolic(s0: T, s1: T, offset: T) -> Result<Self> {
        if !(s0 > T::zero()) || !(s1 > T::zero()) {
            return Err(invalid("slownesses must be positive"));
        }
        Ok(Self {
            background: PhaseModel::Hyperbolic { slowness: s0, offset },
            perturbed: PhaseModel::Hyperbolic { slowness: s1, offset },
            eta_seeds: (T::zero(), T::zero()),
        })
    }

    pub fn eta_dim(&self) -> usize {
        usize::from(self.background.has_eta() || self.perturbed.has_eta())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftMethod {
    PhasePrediction,
    SingularSupport,
    GammaSweep,
}

impl ShiftMethod {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::PhasePrediction => "phase_prediction",
            Self::SingularSupport => "singular_support",
            Self::GammaSweep => "gamma_sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftValue<T> {
    pub value: T,
    pub method: ShiftMethod,
    pub uncertainty: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftEstimate<T> {
    pub station: T,
    pub shifts: Vec<ShiftValue<T>>,
    /// Flagged points attributed to cross-branch pairings.
    pub artifacts: Vec<T>,
    /// Stationary `η` of background and perturbed phase, when they depend on `η`.
    pub stationary_eta: Option<(T, T)>,
    pub truth: Option<Vec<T>>,
}

const SOLVER_TOL: f64 = 1e-14;

fn stationary_eta<T: Real>(phase: &PhaseModel<T>, x: T, rho: T, seed: T) -> Result<T> {
    if !phase.has_eta() {
        return Ok(T::zero());
    }
    let tol = T::lit(SOLVER_TOL).max(T::lit(16.0) * T::epsilon());
    newton_1d(|e| phase.d_eta(x, e, rho), |e| phase.d_eta2(x, e, rho), seed, tol, 100).map(|r| r.value)
}

/// `t₁ - t₀ = ∂_ρψ₀(x, η₁, ρ) - ∂_ρφ₀(x, η₀, ρ)` with `η₀, η₁` stationary for each phase.
pub fn predict_shift_at<T: Real>(pair: &PhasePair<T>, x: T, rho: T) -> Result<ShiftEstimate<T>> {
    if rho == T::zero() {
        return Err(invalid("rho must be nonzero"));
    }
    let eta0 = stationary_eta(&pair.background, x, rho, pair.eta_seeds.0 * rho.abs())?;
    let eta1 = stationary_eta(&pair.perturbed, x, rho, pair.eta_seeds.1 * rho.abs())?;
    let value = pair.perturbed.d_rho(x, eta1, rho) - pair.background.d_rho(x, eta0, rho);
    let uncertainty = T::lit(SOLVER_TOL).max(T::lit(16.0) * T::epsilon()) * (T::one() + x.abs());
    Ok(ShiftEstimate {
        station: x,
        shifts: vec![ShiftValue { value, method: ShiftMethod::PhasePrediction, uncertainty }],
        artifacts: Vec::new(),
        stationary_eta: (pair.eta_dim() > 0).then_some((eta0, eta1)),
        truth: None,
    })
}

/// Shift on the forward (`ρ = +1`) or backward (`ρ = -1`) branch.
pub fn predict_shift_from_phases<T: Real>(pair: &PhasePair<T>, x: T, forward: bool) -> Result<ShiftEstimate<T>> {
    predict_shift_at(pair, x, if forward { T::one() } else { -T::one() })
}

/// Outcome of the stationarity criterion `∂_t|c| = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryCandidates<T> {
    /// Isolated zeros of the differenced `|c|`.
    pub roots: Vec<T>,
    /// Intervals on which the differenced `|c|` stays below the tolerance.
    pub plateaus: Vec<(T, T)>,
}

impl<T: Real> StationaryCandidates<T> {
    pub fn degenerate(&self) -> bool {
        !self.plateaus.is_empty()
    }
}

/// Zeros of the forward difference of `|c|`. Runs of differences below `tol` are reported
/// as plateaus and never as roots; a root needs a sign change between adjacent differences
/// that both exceed `tol`.
pub fn stationary_point_estimator<T: Real>(curve: &CorrelationCurve<T>, tol: T) -> Result<StationaryCandidates<T>> {
    if curve.values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(invalid("curve has non-finite samples"));
    }
    let dt = curve.spacing();
    let n = curve.values.len();
    let m: Vec<T> = curve.values.iter().map(|v| v.norm()).collect();
    let d: Vec<T> = (0..n - 1).map(|i| (m[i + 1] - m[i]) / dt).collect();
    let mid = |i: usize| (curve.grid.point(i) + curve.grid.point(i + 1)) * T::lit(0.5);
    let flat = |v: T| v.abs() < tol;
    let mut roots = Vec::new();
    let mut plateaus = Vec::new();
    let mut run: Option<usize> = None;
    for i in 0..d.len() {
        if flat(d[i]) {
            run.get_or_insert(i);
            continue;
        }
        if let Some(start) = run.take() {
            plateaus.push((curve.grid.point(start), curve.grid.point(i)));
        }
        if i + 1 < d.len() && !flat(d[i + 1]) && (d[i] > T::zero()) != (d[i + 1] > T::zero()) {
            let (a, b) = (mid(i), mid(i + 1));
            let (da, db) = (d[i], d[i + 1]);
            let line = |t: T| da + (db - da) * (t - a) / (b - a);
            roots.push(bisect(line, a, b, dt * T::lit(1e-9))?);
        }
    }
    if let Some(start) = run {
        plateaus.push((curve.grid.point(start), curve.grid.point(n - 1)));
    }
    Ok(StationaryCandidates { roots, plateaus })
}

/// Splits flagged points into same-branch shifts and cross-branch artifacts.
///
/// With `γ` known, points within `tolerance` of `±x(1 - 1/γ)` are true shifts and those near
/// `±x(1 + 1/γ)` are artifacts. Without `γ`, the flagged point of smallest `|t|` on each side
/// of zero is taken as the same-branch pair, which is exact for `γ` near 1.
pub fn estimate_shift_from_singsupp<T: Real>(
    report: &DetectionReport<T>,
    x: T,
    gamma: Option<T>,
    tolerance: T,
) -> Result<ShiftEstimate<T>> {
    if report.flagged.is_empty() {
        return Err(invalid("no flagged points to interpret"));
    }
    let uncertainty = report.merge_radius.max(report.spacing);
    let shift = |value: T| ShiftValue { value, method: ShiftMethod::SingularSupport, uncertainty };
    let mut true_shifts = Vec::new();
    let mut artifacts = Vec::new();
    let truth;
    match gamma {
        Some(g) => {
            if !(g > T::zero()) {
                return Err(invalid("gamma must be positive"));
            }
            let same = x.abs() * (T::one() - g.recip());
            let cross = x.abs() * (T::one() + g.recip());
            for p in &report.flagged {
                if (p.t.abs() - same.abs()).abs() <= tolerance {
                    true_shifts.push(p.t);
                } else if (p.t.abs() - cross).abs() <= tolerance {
                    artifacts.push(p.t);
                }
            }
            if true_shifts.is_empty() && artifacts.is_empty() {
                return Err(Error::SolverFailure(format!(
                    "no flagged point within {tolerance} of ±{same} or ±{cross}"
                )));
            }
            truth = Some(if same == T::zero() { vec![T::zero()] } else { vec![-same, same] });
        }
        None => {
            let neg = report
                .flagged
                .iter()
                .filter(|p| p.t < T::zero())
                .map(|p| p.t)
                .fold(None, |b: Option<T>, t| Some(b.map_or(t, |b| b.max(t))));
            let pos = report
                .flagged
                .iter()
                .filter(|p| p.t >= T::zero())
                .map(|p| p.t)
                .fold(None, |b: Option<T>, t| Some(b.map_or(t, |b| b.min(t))));
            true_shifts.extend(neg);
            true_shifts.extend(pos);
            artifacts = report.flagged.iter().map(|p| p.t).filter(|t| !true_shifts.contains(t)).collect();
            truth = None;
        }
    }
    Ok(ShiftEstimate {
        station: x,
        shifts: true_shifts.into_iter().map(shift).collect(),
        artifacts,
        stationary_eta: None,
        truth,
    })
}

/// Result of continuing `t(x, γ)` along a velocity sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaSweepResult<T> {
    /// Ascending, including the anchor `γ = 1`.
    pub gamma: Vec<T>,
    /// Roots of `F_ε(x, t, γ) = 0`.
    pub t: Vec<T>,
    pub dtdgamma: Vec<T>,
    /// `∫_1^γ ∂_γt` by the trapezoid rule over the samples.
    pub t_integrated: Vec<T>,
    pub reference: Vec<T>,
    pub dtdgamma_at_one: T,
    pub max_deviation_solved: T,
    pub max_deviation_integrated: T,
    pub max_deviation: T,
}

/// `F_ε(t, γ) ∝ ∂_t c_ε(t) = A'(k)/(γε²)` with `k = (t + x(1 - 1/γ))/ε` and `A` the
/// autocorrelation of `ρ`.
struct SweepModel<'a, T> {
    x: T,
    eps: T,
    rho: &'a Mollifier<T>,
}

impl<T: Real> SweepModel<'_, T> {
    fn k(&self, t: T, g: T) -> T {
        (t + self.x * (T::one() - g.recip())) / self.eps
    }

    fn f(&self, t: T, g: T) -> T {
        self.rho.autocorrelation_d1(self.k(t, g)) / (g * self.eps * self.eps)
    }

    fn f_t(&self, t: T, g: T) -> T {
        self.rho.autocorrelation_d2(self.k(t, g)) / (g * self.eps * self.eps * self.eps)
    }

    /// Root of `F(·, γ)` and `∂_γt = -∂_γF/∂_tF` there.
    fn solve(&self, g: T, seed: T) -> Result<(T, T)> {
        let scale = (g * self.eps * self.eps).recip();
        let tol = T::lit(1e-15).max(T::lit(16.0) * T::epsilon()) * scale;
        let root = newton_1d(|t| self.f(t, g), |t| self.f_t(t, g), seed, tol, 100)?.value;
        let ft = self.f_t(root, g);
        let floor = T::lit(1e-8) * scale / self.eps;
        if !(ft.abs() > floor) {
            return Err(Error::SolverFailure(format!("∂_tF = {ft:e} below conditioning floor at γ = {g}")));
        }
        let h = T::lit(1e-5) * g;
        let fg = central_difference(|gg| self.f(root, gg), g, h);
        Ok((root, -fg / ft))
    }
}

/// Solves `F_ε(x, t, γ) = 0` by Newton continuation from `(γ, t) = (1, 0)` out to both ends
/// of `[γ_lo, γ_hi]` (`steps` uniform samples plus the anchor) and integrates `∂_γt`.
pub fn implicit_gamma_sweep<T: Real>(
    x: T,
    gamma_range: (T, T),
    eps: T,
    steps: usize,
    rho: &Mollifier<T>,
) -> Result<GammaSweepResult<T>> {
    let (lo, hi) = gamma_range;
    if !(lo > T::zero()) || !(lo <= T::one()) || !(hi >= T::one()) || !hi.is_finite() {
        return Err(invalid("gamma range must lie in (0, ∞) and contain 1"));
    }
    if !(eps > T::zero()) {
        return Err(invalid("mollification width must be positive"));
    }
    if steps < 2 {
        return Err(invalid("a sweep needs at least two samples"));
    }
    if !rho.is_even() {
        return Err(invalid("the sweep requires an even mollifier"));
    }
    let model = SweepModel { x, eps, rho };
    let mut gammas: Vec<T> =
        (0..steps)
            .map(|j| {
                if j + 1 == steps {
                    hi
                } else {
                    lo + (hi - lo) * T::from_usize_lossy(j) / T::from_usize_lossy(steps - 1)
                }
            })
            .collect();
    if !gammas.iter().any(|g| *g == T::one()) {
        gammas.push(T::one());
        gammas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }
    let anchor = gammas.iter().position(|g| *g == T::one()).expect("anchor inserted");
    let n = gammas.len();
    let mut t = vec![T::zero(); n];
    let mut dt = vec![T::zero(); n];
    let (t1, d1) = model.solve(T::one(), T::zero())?;
    t[anchor] = t1;
    dt[anchor] = d1;
    for i in anchor + 1..n {
        let (r, d) = model.solve(gammas[i], t[i - 1])?;
        t[i] = r;
        dt[i] = d;
    }
    for i in (0..anchor).rev() {
        let (r, d) = model.solve(gammas[i], t[i + 1])?;
        t[i] = r;
        dt[i] = d;
    }
    let mut t_int = vec![T::zero(); n];
    let half = T::lit(0.5);
    for i in anchor + 1..n {
        t_int[i] = t_int[i - 1] + (gammas[i] - gammas[i - 1]) * (dt[i] + dt[i - 1]) * half;
    }
    for i in (0..anchor).rev() {
        t_int[i] = t_int[i + 1] - (gammas[i + 1] - gammas[i]) * (dt[i] + dt[i + 1]) * half;
    }
    let reference: Vec<T> = gammas.iter().map(|g| -x * (T::one() - g.recip())).collect();
    let dev = |v: &[T]| v.iter().zip(&reference).fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()));
    let max_deviation_solved = dev(&t);
    let max_deviation_integrated = dev(&t_int);
    Ok(GammaSweepResult {
        dtdgamma_at_one: dt[anchor],
        gamma: gammas,
        t,
        dtdgamma: dt,
        t_integrated: t_int,
        reference,
        max_deviation_solved,
        max_deviation_integrated,
        max_deviation: max_deviation_solved.max(max_deviation_integrated),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlate::{correlate_closed_form, correlate_regularized, CorrelationCase};
    use crate::detect::{Direction, FlaggedPoint};
    use crate::regularize::TimeGrid;
    use crate::traces::StationTrace;
    use approx::assert_abs_diff_eq;

    fn report(ts: &[f64]) -> DetectionReport<f64> {
        DetectionReport {
            flagged: ts.iter().map(|&t| FlaggedPoint { t, slope: 0.0, direction: Direction::Minus }).collect(),
            slope_threshold: 1.5,
            merge_radius: 2e-3,
            spacing: 1e-3,
            scales: vec![],
            scanned: (0, 0),
            method: "test",
        }
    }

    #[test]
    fn plane_pair_shifts() {
        let pair = PhasePair::plane(2.0).unwrap();
        let f = predict_shift_from_phases(&pair, 1.0, true).unwrap();
        assert_abs_diff_eq!(f.shifts[0].value, -0.5, epsilon = 1e-15);
        let b = predict_shift_from_phases(&pair, 1.0, false).unwrap();
        assert_abs_diff_eq!(b.shifts[0].value, 0.5, epsilon = 1e-15);
        let same = predict_shift_from_phases(&PhasePair::plane(1.0).unwrap(), 1.0, true).unwrap();
        assert_eq!(same.shifts[0].value, 0.0);
        assert!(f.stationary_eta.is_none());
    }

    #[test]
    fn hyperbolic_stationary_eta() {
        let pair = PhasePair::hyperbolic(1.0, 0.8, 0.3).unwrap();
        let e = predict_shift_from_phases(&pair, 1.0, true).unwrap();
        let (e0, _) = e.stationary_eta.unwrap();
        // η₀ = b·s/√(x² - b²).
        assert_abs_diff_eq!(e0, 0.3 / (1.0f64 - 0.09).sqrt(), epsilon = 1e-13);
    }

    #[test]
    fn singsupp_labelling() {
        let e = estimate_shift_from_singsupp(&report(&[-1.5, -0.5, 0.5, 1.5]), 1.0, Some(2.0), 2e-3).unwrap();
        let v: Vec<f64> = e.shifts.iter().map(|s| s.value).collect();
        assert_eq!(v, vec![-0.5, 0.5]);
        assert_eq!(e.artifacts, vec![-1.5, 1.5]);
        let e = estimate_shift_from_singsupp(&report(&[0.0]), 1.0, Some(1.0), 2e-3).unwrap();
        assert_eq!(e.shifts[0].value, 0.0);
        let e = estimate_shift_from_singsupp(&report(&[-1.5, -0.5, 0.5, 1.5]), 1.0, None, 2e-3).unwrap();
        assert_eq!(e.shifts.len(), 2);
        assert_eq!(e.artifacts, vec![-1.5, 1.5]);
        assert!(estimate_shift_from_singsupp(&report(&[0.9]), 1.0, Some(2.0), 2e-3).is_err());
    }

    #[test]
    fn stationarity_on_regularized_delta() {
        let u = StationTrace::atom(1.0, 1.0, 1.0).unwrap();
        let v = StationTrace::atom(1.0, 0.5, 0.5).unwrap();
        let grid = TimeGrid::new(-1.0, 0.0, 1001).unwrap();
        let c = correlate_regularized(&u, &v, &Mollifier::gaussian(), 0.05, &grid).unwrap();
        let s = stationary_point_estimator(&c, 1e-9).unwrap();
        assert_eq!(s.roots.len(), 1);
        assert_abs_diff_eq!(s.roots[0], -0.5, epsilon = 1e-3);
    }

    #[test]
    fn stationarity_on_step_is_degenerate() {
        let c = correlate_closed_form(CorrelationCase::DeltaShock, 1.0, 2.0).unwrap();
        let grid = TimeGrid::new(-1.0, 0.0, 1001).unwrap();
        let curve = c.sample(&grid, &Mollifier::gaussian(), 0.0, 1.0, 2.0).unwrap();
        let s = stationary_point_estimator(&curve, 1e-9).unwrap();
        assert!(s.roots.is_empty());
        assert!(s.degenerate());
    }

    #[test]
    fn sweep_recovers_shift_law() {
        let r = implicit_gamma_sweep(1.0, (0.8, 1.25), 0.05, 41, &Mollifier::gaussian()).unwrap();
        assert!(r.max_deviation <= 1e-4);
        assert_abs_diff_eq!(r.dtdgamma_at_one, -1.0, epsilon = 1e-5);
        let anchor = r.gamma.iter().position(|g| *g == 1.0).unwrap();
        assert_eq!(r.t[anchor], 0.0);
    }
}
