use approx::assert_abs_diff_eq;
use num_complex::Complex;
use proptest::prelude::*;

use wavecorr::correlate::{correlate_closed_form, correlate_regularized, CorrelationCase};
use wavecorr::detect::{detect_singular_support, slope_profile, DetectParams};
use wavecorr::regularize::{mollify_trace, Mollifier, SampledSignal, TimeGrid};
use wavecorr::shift::{
    estimate_shift_from_singsupp, implicit_gamma_sweep, predict_shift_at, predict_shift_from_phases,
    stationary_point_estimator, PhasePair,
};
use wavecorr::traces::{build_field, restrict_to_station, FieldKind, FieldSpec, StationTrace};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shift_is_invariant_under_phase_rescaling(
        s0 in 0.3f64..2.0, s1 in 0.3f64..2.0, b in -0.8f64..0.8, lambda in 0.05f64..20.0,
    ) {
        let pair = PhasePair::hyperbolic(s0, s1, b).unwrap();
        for sign in [1.0, -1.0] {
            let base = predict_shift_at(&pair, 1.0, sign).unwrap().shifts[0].value;
            let scaled = predict_shift_at(&pair, 1.0, sign * lambda).unwrap().shifts[0].value;
            prop_assert!((base - scaled).abs() <= 1e-12 * (1.0 + base.abs()));
        }
    }

    #[test]
    fn regularized_correlation_is_translation_covariant(
        tu in -1.0f64..1.0, tv in -1.0f64..1.0, a in -0.5f64..0.5, t in -2.0f64..2.0,
    ) {
        let rho = Mollifier::gaussian();
        let u = StationTrace::atom(1.0, tu, 1.0).unwrap();
        let v = StationTrace::atom(1.0, tv, 0.5).unwrap();
        let va = StationTrace::atom(1.0, tv + a, 0.5).unwrap();
        let g = TimeGrid::new(t, t + 1.0, 2).unwrap();
        let ga = TimeGrid::new(t + a, t + a + 1.0, 2).unwrap();
        let c = correlate_regularized(&u, &v, &rho, 0.05, &g).unwrap();
        let ca = correlate_regularized(&u, &va, &rho, 0.05, &ga).unwrap();
        prop_assert!((c.values[0] - ca.values[0]).norm() <= c.error_bounds[0] + ca.error_bounds[0]);
    }

    #[test]
    fn step_correlation_has_no_isolated_stationary_point(gamma in 0.5f64..3.0) {
        let cf = correlate_closed_form(CorrelationCase::DeltaShock, 1.0, gamma).unwrap();
        let grid = TimeGrid::new(-3.0, 3.0, 2001).unwrap();
        let curve = cf.sample(&grid, &Mollifier::gaussian(), 0.0, 1.0, gamma).unwrap();
        let s = stationary_point_estimator(&curve, 1e-9).unwrap();
        prop_assert!(s.roots.is_empty());
        prop_assert!(s.degenerate());
    }
}

fn mixed_signal() -> SampledSignal<f64> {
    let grid = TimeGrid::with_spacing(-3.0, 3.0, 2f64.powi(-10)).unwrap();
    SampledSignal::from_fn(grid, |t| {
        let kink = (t - 0.4).abs().min(0.5);
        let step = if t < -0.6 { 1.0 } else { 0.0 };
        Complex::new((-t * t).exp() + kink + step, 0.0)
    })
}

#[test]
fn flagged_set_grows_with_threshold() {
    let s = mixed_signal();
    let params = DetectParams::default();
    let profile = slope_profile(&s, &params).unwrap();
    let flagged = |th: f64| -> Vec<usize> {
        profile.slopes.iter().enumerate().filter(|(_, (sl, _))| *sl <= th).map(|(i, _)| i).collect()
    };
    let mut prev = flagged(-2.0);
    for th in [-1.0, 0.0, 0.5, 1.0, 1.5, 2.0, 3.0] {
        let cur = flagged(th);
        assert!(prev.iter().all(|i| cur.contains(i)), "threshold {th}");
        prev = cur;
    }
    let report = detect_singular_support(&s, &params).unwrap();
    let ts = report.times();
    assert!(ts.iter().any(|t| (t + 0.6).abs() < 4e-3), "{ts:?}");
    assert!(ts.iter().any(|t| (t - 0.4).abs() < 4e-3), "{ts:?}");
}

#[test]
fn detection_is_deterministic() {
    let s = mixed_signal();
    let params = DetectParams::default();
    let a = detect_singular_support(&s, &params).unwrap();
    let b = detect_singular_support(&s, &params).unwrap();
    assert_eq!(a, b);
}

#[test]
fn shift_estimators_agree_on_case1() {
    let (x, gamma) = (1.0f64, 2.0f64);
    let predicted = predict_shift_from_phases(&PhasePair::plane(gamma).unwrap(), x, true).unwrap().shifts[0];

    let field_u = build_field(&FieldSpec::new(FieldKind::DeltaTravel, 1.0)).unwrap();
    let field_v = build_field(&FieldSpec::new(FieldKind::DeltaTravel, gamma)).unwrap();
    let u = restrict_to_station(&field_u, x).unwrap();
    let v = restrict_to_station(&field_v, x).unwrap();
    let grid = TimeGrid::with_spacing(-3.0, 2.0, 1e-3).unwrap();
    let c = correlate_regularized(&u, &v, &Mollifier::gaussian(), 0.01, &grid).unwrap();
    let report = detect_singular_support(&c, &DetectParams::default()).unwrap();
    let est = estimate_shift_from_singsupp(&report, x, Some(gamma), 2e-3).unwrap();
    assert_eq!(est.shifts.len(), 1);
    let singsupp = est.shifts[0];

    let sweep = implicit_gamma_sweep(x, (0.8, gamma), 0.05, 41, &Mollifier::gaussian()).unwrap();
    let swept = *sweep.t.last().unwrap();
    let tol = predicted.uncertainty.max(singsupp.uncertainty).max(sweep.max_deviation);
    assert!((predicted.value - singsupp.value).abs() <= tol);
    assert!((predicted.value - swept).abs() <= tol);
}

#[test]
fn mollified_delta_keeps_unit_mass() {
    let trace = StationTrace::atom(1.0, 0.25, 1.0).unwrap();
    let grid = TimeGrid::with_spacing(-1.0, 1.0, 1e-3).unwrap();
    let s = mollify_trace(&trace, &Mollifier::gaussian(), 0.02, &grid).unwrap();
    assert_abs_diff_eq!(s.pair_with(|_| 1.0).re, 1.0, epsilon = 1e-12);
    // The bump is flat to all orders at its edges but resolved by only 20 samples per side.
    let s = mollify_trace(&trace, &Mollifier::compact_bump(), 0.02, &grid).unwrap();
    assert_abs_diff_eq!(s.pair_with(|_| 1.0).re, 1.0, epsilon = 1e-5);
}
