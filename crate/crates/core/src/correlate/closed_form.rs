use num_complex::Complex;

use super::{CorrelationCurve, CorrelationMethod, CurveMeta};
use crate::error::{invalid, Result};
use crate::regularize::{Mollifier, TimeGrid};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationCase {
    /// Two travelling deltas.
    DeltaDelta,
    /// Travelling delta against a Heaviside shock.
    DeltaShock,
}

/// Distributional correlation of the elementary cases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedFormCorrelation<T> {
    /// `mass · δ_{location}`.
    ScaledDelta { location: T, mass: T },
    /// `high` left of `location`, `mid` at it, `low` right of it.
    StepDown { location: T, high: T, mid: T, low: T },
}

pub fn correlate_closed_form<T: Real>(case: CorrelationCase, x: T, gamma: T) -> Result<ClosedFormCorrelation<T>> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(invalid("closed forms are stated for x > 0; use the mirror symmetry for x < 0"));
    }
    if !(gamma > T::zero()) || !gamma.is_finite() {
        return Err(invalid("gamma must be positive"));
    }
    let location = -x * (T::one() - gamma.recip());
    Ok(match case {
        CorrelationCase::DeltaDelta => ClosedFormCorrelation::ScaledDelta { location, mass: gamma.recip() },
        CorrelationCase::DeltaShock => {
            ClosedFormCorrelation::StepDown { location, high: T::one(), mid: T::lit(0.5), low: T::zero() }
        }
    })
}

impl<T: Real> ClosedFormCorrelation<T> {
    pub fn location(&self) -> T {
        match self {
            Self::ScaledDelta { location, .. } | Self::StepDown { location, .. } => *location,
        }
    }

    /// Samples the step exactly; a delta is represented by `mass · ρ_ε(t - t̄)`.
    pub fn sample(
        &self,
        grid: &TimeGrid<T>,
        rho: &Mollifier<T>,
        eps: T,
        x: T,
        gamma: T,
    ) -> Result<CorrelationCurve<T>> {
        let times = grid.points();
        let values: Vec<Complex<T>> = match *self {
            Self::ScaledDelta { location, mass } => {
                if !(eps > T::zero()) {
                    return Err(invalid("a delta needs a positive mollification width to be sampled"));
                }
                times.iter().map(|&t| Complex::new(mass * rho.scaled(t - location, eps), T::zero())).collect()
            }
            Self::StepDown { location, high, mid, low } => times
                .iter()
                .map(|&t| {
                    let v = if t < location {
                        high
                    } else if t > location {
                        low
                    } else {
                        mid
                    };
                    Complex::new(v, T::zero())
                })
                .collect(),
        };
        let meta = CurveMeta {
            method: CorrelationMethod::ClosedForm,
            station: x,
            gamma,
            eps: matches!(self, Self::ScaledDelta { .. }).then_some(eps),
            tol: None,
            xi_max: None,
        };
        CorrelationCurve::new(*grid, values, vec![T::zero(); grid.n], meta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_and_shock_cases() {
        assert_eq!(
            correlate_closed_form(CorrelationCase::DeltaDelta, 1.0, 2.0).unwrap(),
            ClosedFormCorrelation::ScaledDelta { location: -0.5, mass: 0.5 }
        );
        assert_eq!(
            correlate_closed_form(CorrelationCase::DeltaDelta, 1.0, 1.0).unwrap(),
            ClosedFormCorrelation::ScaledDelta { location: 0.0, mass: 1.0 }
        );
        assert_eq!(
            correlate_closed_form(CorrelationCase::DeltaShock, 1.0, 2.0).unwrap(),
            ClosedFormCorrelation::StepDown { location: -0.5, high: 1.0, mid: 0.5, low: 0.0 }
        );
        assert!(correlate_closed_form(CorrelationCase::DeltaDelta, -1.0, 2.0).is_err());
        assert!(correlate_closed_form(CorrelationCase::DeltaDelta, 1.0, 0.0).is_err());
    }

    #[test]
    fn step_samples() {
        let c = correlate_closed_form(CorrelationCase::DeltaShock, 1.0, 2.0).unwrap();
        let grid = TimeGrid::new(-1.0, 0.0, 3).unwrap();
        let curve = c.sample(&grid, &Mollifier::gaussian(), 0.0, 1.0, 2.0).unwrap();
        let re: Vec<f64> = curve.values.iter().map(|v| v.re).collect();
        assert_eq!(re, vec![1.0, 0.5, 0.0]);
    }
}
