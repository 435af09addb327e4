#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

//! Distributional cross-correlation of wave traces at a station, and detection of the
//! singular support of the correlation.

pub mod acceptance;
pub mod correlate;
pub mod detect;
pub mod error;
pub mod numerics;
pub mod regularize;
pub mod scalar;
pub mod shift;
pub mod traces;

pub use error::{Error, Result};
pub use scalar::Real;

pub type StationTraceF64 = traces::StationTrace<f64>;
pub type WaveFieldF64 = traces::WaveField<f64>;
pub type MollifierF64 = regularize::Mollifier<f64>;
pub type CutoffChiF64 = regularize::CutoffChi<f64>;
pub type TimeGridF64 = regularize::TimeGrid<f64>;
pub type SampledSignalF64 = regularize::SampledSignal<f64>;
pub type CorrelationCurveF64 = correlate::CorrelationCurve<f64>;
pub type QuadParamsF64 = numerics::QuadParams<f64>;
pub type DetectParamsF64 = detect::DetectParams<f64>;
pub type DetectionReportF64 = detect::DetectionReport<f64>;
pub type ScalogramF64 = detect::Scalogram<f64>;
pub type PhasePairF64 = shift::PhasePair<f64>;
pub type ShiftEstimateF64 = shift::ShiftEstimate<f64>;
pub type GammaSweepResultF64 = shift::GammaSweepResult<f64>;
