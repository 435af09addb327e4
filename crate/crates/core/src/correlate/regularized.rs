use num_complex::Complex;

use super::{CorrelationCurve, CorrelationMethod, CurveMeta};
use crate::error::{invalid, Error, Result};
use crate::numerics::{integrate_interval, QuadResult};
use crate::regularize::{Mollifier, MollifierKind, TimeGrid};
use crate::scalar::Real;
use crate::traces::{StationTrace, TraceKind};

fn check_eps<T: Real>(eps: T) -> Result<()> {
    if !(eps > T::zero()) || !eps.is_finite() {
        return Err(invalid("mollification width must be positive"));
    }
    Ok(())
}

/// `c_ε(t)` reduced to one mollifier overlap, together with the magnitude that sets its
/// absolute accuracy.
fn reduced_value<T: Real>(u: &TraceKind<T>, v: &TraceKind<T>, rho: &Mollifier<T>, eps: T, t: T) -> Result<(T, T)> {
    match (u, v) {
        (TraceKind::Atom { location: tu, weight: wu }, TraceKind::Atom { location: tv, weight: wv }) => {
            let scale = (*wu * *wv).abs() / eps;
            Ok((*wu * *wv / eps * rho.autocorrelation((t + *tu - *tv) / eps), scale))
        }
        (TraceKind::Atom { location: tu, weight: wu }, TraceKind::Jump { location: tv, left, right }) => {
            let s = rho.smoothed_cdf((t + *tu - *tv) / eps);
            Ok((*wu * (*left + (*right - *left) * s), wu.abs() * left.abs().max(right.abs())))
        }
        (TraceKind::Jump { location: tu, left, right }, TraceKind::Atom { location: tv, weight: wv }) => {
            let s = rho.smoothed_cdf((*tv - t - *tu) / eps);
            Ok((*wv * (*left + (*right - *left) * s), wv.abs() * left.abs().max(right.abs())))
        }
        (TraceKind::Jump { .. }, TraceKind::Jump { .. }) => {
            Err(Error::Unsupported("the product of two mollified jumps is not integrable".into()))
        }
        _ => Err(invalid("regularized correlation takes atom or jump traces")),
    }
}

fn value_bound<T: Real>(rho: &Mollifier<T>, scale: T) -> T {
    let rel = match rho.kind() {
        MollifierKind::Gaussian => T::lit(16.0) * T::epsilon(),
        MollifierKind::CompactBump => T::lit(1e-13).max(T::lit(1e4) * T::epsilon()),
    };
    rel * scale
}

/// Samples `c_ε(t) = ∫ u^ε(s) conj(v^ε(s + t)) ds` on `grid`.
///
/// Each sample is the rescaled overlap `∫ρ(y) g(y + k) dy`, in closed form for the Gaussian
/// and by adaptive quadrature for the bump.
pub fn correlate_regularized<T: Real>(
    u: &StationTrace<T>,
    v: &StationTrace<T>,
    rho: &Mollifier<T>,
    eps: T,
    grid: &TimeGrid<T>,
) -> Result<CorrelationCurve<T>> {
    check_eps(eps)?;
    let mut values = Vec::with_capacity(grid.n);
    let mut bounds = Vec::with_capacity(grid.n);
    for t in grid.points() {
        let (c, scale) = reduced_value(&u.kind, &v.kind, rho, eps, t)?;
        values.push(Complex::new(c, T::zero()));
        bounds.push(value_bound(rho, scale));
    }
    let gamma = match &v.kind {
        TraceKind::Atom { location, .. } | TraceKind::Jump { location, .. } if *location != T::zero() => {
            u.station / *location
        }
        _ => T::nan(),
    };
    let meta = CurveMeta {
        method: CorrelationMethod::Regularized,
        station: u.station,
        gamma,
        eps: Some(eps),
        tol: Some(value_bound(rho, T::one())),
        xi_max: None,
    };
    CorrelationCurve::new(*grid, values, bounds, meta)
}

fn mollified_at<T: Real>(kind: &TraceKind<T>, rho: &Mollifier<T>, eps: T, s: T) -> T {
    match *kind {
        TraceKind::Atom { location, weight } => weight * rho.scaled(s - location, eps),
        TraceKind::Jump { location, left, right } => left + (right - left) * rho.cdf((s - location) / eps),
        TraceKind::OI { .. } => T::nan(),
    }
}

/// `c_ε(t)` by direct adaptive quadrature in `s`; an independent path for cross-checks.
pub fn regularized_value_by_quadrature<T: Real>(
    u: &StationTrace<T>,
    v: &StationTrace<T>,
    rho: &Mollifier<T>,
    eps: T,
    t: T,
    tol: T,
) -> Result<QuadResult<T>> {
    check_eps(eps)?;
    let center = match (&u.kind, &v.kind) {
        (TraceKind::Atom { location, .. }, _) => *location,
        (_, TraceKind::Atom { location, .. }) => *location - t,
        _ => return Err(Error::Unsupported("direct quadrature needs an atom factor".into())),
    };
    let r = rho.effective_radius();
    let steps = (r * T::lit(2.0)).ceil().to_usize().unwrap_or(2).max(2);
    let breaks: Vec<T> = (0..=steps)
        .map(|j| center + eps * (-r + (r + r) * T::from_usize_lossy(j) / T::from_usize_lossy(steps)))
        .collect();
    integrate_interval(
        |s| {
            let a = mollified_at(&u.kind, rho, eps, s);
            let b = mollified_at(&v.kind, rho, eps, s + t);
            Complex::new(a * b, T::zero())
        },
        &breaks,
        tol,
        1 << 16,
    )
}

/// `∫_a^b φ(t) c_ε(t) dt` for a real test function.
pub fn regularized_pairing<T: Real>(
    u: &StationTrace<T>,
    v: &StationTrace<T>,
    rho: &Mollifier<T>,
    eps: T,
    phi: impl Fn(T) -> T,
    a: T,
    b: T,
    tol: T,
) -> Result<QuadResult<T>> {
    check_eps(eps)?;
    let tbar = match (&u.kind, &v.kind) {
        (
            TraceKind::Atom { location: tu, .. } | TraceKind::Jump { location: tu, .. },
            TraceKind::Atom { location: tv, .. } | TraceKind::Jump { location: tv, .. },
        ) => *tv - *tu,
        _ => return Err(invalid("regularized pairing takes atom or jump traces")),
    };
    let mut breaks = vec![a];
    for j in -16i32..=16 {
        let p = tbar + eps * T::lit(j as f64);
        if p > a && p < b {
            breaks.push(p);
        }
    }
    breaks.push(b);
    let failure = std::cell::RefCell::new(None);
    let res = integrate_interval(
        |t| match reduced_value(&u.kind, &v.kind, rho, eps, t) {
            Ok((c, _)) => Complex::new(phi(t) * c, T::zero()),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                Complex::new(T::zero(), T::zero())
            }
        },
        &breaks,
        tol,
        1 << 18,
    );
    match failure.into_inner() {
        Some(e) => Err(e),
        None => res,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn case1() -> (StationTrace<f64>, StationTrace<f64>) {
        (StationTrace::atom(1.0, 1.0, 1.0).unwrap(), StationTrace::atom(1.0, 0.5, 0.5).unwrap())
    }

    #[test]
    fn peak_value_and_location() {
        let (u, v) = case1();
        let grid = TimeGrid::new(-1.0, 0.0, 1001).unwrap();
        let c = correlate_regularized(&u, &v, &Mollifier::gaussian(), 0.1, &grid).unwrap();
        assert_abs_diff_eq!(c.peak_time(), -0.5, epsilon = 1e-3);
        // (1/(γε))·∫ρ² with ∫ρ² = 1/(2√π).
        let expected = 1.0 / (2.0 * 0.1) / (2.0 * std::f64::consts::PI.sqrt());
        assert_abs_diff_eq!(c.values[500].re, expected, epsilon = 1e-13);
        assert_abs_diff_eq!(expected, 1.4105, epsilon = 1e-4);
    }

    #[test]
    fn closed_form_agrees_with_direct_quadrature() {
        let (u, v) = case1();
        let jump = StationTrace::jump(1.0, 0.5, 1.0, 0.0).unwrap();
        for rho in [Mollifier::gaussian(), Mollifier::compact_bump()] {
            for t in [-0.6, -0.52, -0.5, -0.47] {
                let grid = TimeGrid::new(t, t + 1.0, 2).unwrap();
                for other in [&v, &jump] {
                    let c = correlate_regularized(&u, other, &rho, 0.05, &grid).unwrap();
                    let q = regularized_value_by_quadrature(&u, other, &rho, 0.05, t, 1e-11).unwrap();
                    let d = (c.values[0].re - q.value.re).abs();
                    assert!(
                        d <= q.error_bound + c.error_bounds[0] + 1e-12,
                        "{:?} t={t} d={d:e} qb={:e} cb={:e} c={}",
                        rho.kind(),
                        q.error_bound,
                        c.error_bounds[0],
                        c.values[0].re
                    );
                }
            }
        }
    }

    #[test]
    fn autocorrelation_is_symmetric() {
        let u = StationTrace::atom(1.0, 1.0, 1.0).unwrap();
        let grid = TimeGrid::new(-0.3, 0.3, 61).unwrap();
        let c = correlate_regularized(&u, &u, &Mollifier::gaussian(), 0.05, &grid).unwrap();
        assert_eq!(c.peak_index(), 30);
        for i in 0..30 {
            assert_abs_diff_eq!(c.values[i].re, c.values[60 - i].re, epsilon = 1e-14);
        }
    }

    #[test]
    fn bilinear_in_weights() {
        let (u, v) = case1();
        let u3 = StationTrace::atom(1.0, 1.0, 3.0).unwrap();
        let grid = TimeGrid::new(-0.7, -0.3, 41).unwrap();
        let rho = Mollifier::gaussian();
        let a = correlate_regularized(&u, &v, &rho, 0.05, &grid).unwrap();
        let b = correlate_regularized(&u3, &v, &rho, 0.05, &grid).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert_abs_diff_eq!(3.0 * x.re, y.re, epsilon = 1e-12);
        }
    }

    #[test]
    fn jump_pair_is_rejected() {
        let j = StationTrace::jump(1.0, 0.5, 1.0, 0.0).unwrap();
        let grid = TimeGrid::new(-1.0, 0.0, 3).unwrap();
        assert!(correlate_regularized(&j, &j, &Mollifier::gaussian(), 0.1, &grid).is_err());
    }
}
