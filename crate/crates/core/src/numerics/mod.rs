//! Shared numerical kernels: panel quadrature with certified bounds, special functions,
//! scalar root finding, log-log regression and finite differences.

pub mod diff;
pub mod quadrature;
pub mod regression;
pub mod roots;
pub mod special;

pub use diff::{central_difference, sampled_derivative};
pub use quadrature::{
    integrate_decaying_oscillatory, integrate_interval, DecayingAmplitude, Domain, OscillatoryRule, Phase, QuadParams,
    QuadResult, TailModel,
};
pub use regression::{loglog_regression, LogLogFit};
pub use roots::{bisect, newton_1d, Root};
