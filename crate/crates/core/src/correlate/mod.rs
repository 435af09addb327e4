//! Correlation functions `c(t) = ⟨u_x · conj(T_t^* v_x), 1⟩` with `T_t^* v(s) = v(s + t)`.

mod closed_form;
mod oi;
mod regularized;

use num_complex::Complex;

use crate::error::{invalid, Result};
use crate::regularize::{SampledSignal, TimeGrid};
use crate::scalar::Real;

pub use closed_form::{correlate_closed_form, ClosedFormCorrelation, CorrelationCase};
pub use oi::{correlate_oi, ft_w, parseval_pairing, w_action_oracle, GaussianTestFn, OiCorrelator};
pub use regularized::{correlate_regularized, regularized_pairing, regularized_value_by_quadrature};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationMethod {
    ClosedForm,
    Regularized,
    OscillatoryIntegral,
}

impl CorrelationMethod {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::ClosedForm => "closed_form",
            Self::Regularized => "regularized",
            Self::OscillatoryIntegral => "oscillatory_integral",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveMeta<T> {
    pub method: CorrelationMethod,
    pub station: T,
    pub gamma: T,
    pub eps: Option<T>,
    pub tol: Option<T>,
    pub xi_max: Option<T>,
}

/// Sampled correlation with a per-point absolute error bound.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationCurve<T> {
    pub grid: TimeGrid<T>,
    pub values: Vec<Complex<T>>,
    pub error_bounds: Vec<T>,
    pub meta: CurveMeta<T>,
}

impl<T: Real> CorrelationCurve<T> {
    pub fn new(grid: TimeGrid<T>, values: Vec<Complex<T>>, error_bounds: Vec<T>, meta: CurveMeta<T>) -> Result<Self> {
        if values.len() != grid.n || error_bounds.len() != grid.n {
            return Err(invalid("curve values and bounds must match the grid"));
        }
        if error_bounds.iter().any(|e| !(*e >= T::zero())) {
            return Err(invalid("error bounds must be nonnegative"));
        }
        Ok(Self { grid, values, error_bounds, meta })
    }

    pub fn times(&self) -> Vec<T> {
        self.grid.points()
    }

    pub fn spacing(&self) -> T {
        self.grid.spacing()
    }

    /// Index of the largest `|c(t_i)|`; the first one on ties.
    pub fn peak_index(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if v.norm() > self.values[best].norm() {
                best = i;
            }
        }
        best
    }

    pub fn peak_time(&self) -> T {
        self.grid.point(self.peak_index())
    }

    pub fn max_error_bound(&self) -> T {
        self.error_bounds.iter().fold(T::zero(), |m, e| m.max(*e))
    }

    pub fn to_signal(&self) -> SampledSignal<T> {
        SampledSignal { grid: self.grid, values: self.values.clone(), coarse_grid: false }
    }
}
