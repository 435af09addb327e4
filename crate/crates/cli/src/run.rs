//! Case pipelines behind `wavecorr run`.

use num_complex::Complex;
use serde::Serialize;

use wavecorr::correlate::{
    correlate_closed_form, correlate_oi, correlate_regularized, CorrelationCase, CorrelationCurve, CorrelationMethod,
    CurveMeta,
};
use wavecorr::detect::{detect_singular_support, slope_profile, DetectParams, DetectionReport, Sampled, Scalogram};
use wavecorr::numerics::QuadParams;
use wavecorr::regularize::{CutoffChi, Mollifier, SampledSignal, TimeGrid};
use wavecorr::shift::{estimate_shift_from_singsupp, implicit_gamma_sweep, stationary_point_estimator};
use wavecorr::traces::{build_field, restrict_to_station, FieldKind, FieldSpec};

use crate::config::{Case, ExperimentConfig};
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Flag {
    pub t: f64,
    pub slope: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub gamma: Vec<f64>,
    pub t: Vec<f64>,
    pub dtdgamma: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub case: &'static str,
    pub x: f64,
    pub gamma: f64,
    pub flagged: Vec<Flag>,
    pub true_shifts: Vec<f64>,
    pub artifacts: Vec<f64>,
    pub stationary_candidates: Vec<f64>,
    pub stationary_degenerate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepReport>,
    pub max_deviation: Option<f64>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Everything a run writes to disk.
pub struct Artifacts {
    pub curve: CorrelationCurve<f64>,
    /// Pointwise maximum of `|W|` over the analysed directions.
    pub scalogram: Scalogram<f64>,
    pub report: Report,
}

fn detect_params(c: &ExperimentConfig) -> DetectParams<f64> {
    DetectParams {
        k_min: c.k_min,
        k_max: c.k_max,
        slope_threshold: c.slope_threshold,
        merge_radius: c.merge_radius,
        ..DetectParams::default()
    }
}

fn combined_scalogram<S: Sampled<f64>>(curve: &S, params: &DetectParams<f64>) -> Result<Scalogram<f64>, CliError> {
    let profile = slope_profile(curve, params)?;
    let mut out = profile.scalograms[0].clone();
    for s in &profile.scalograms[1..] {
        for (row, other) in out.abs.iter_mut().zip(&s.abs) {
            for (a, b) in row.iter_mut().zip(other) {
                *a = a.max(*b);
            }
        }
    }
    Ok(out)
}

/// `true` when every expected point has exactly one flag within `tol` and nothing else is flagged.
fn matches_exactly(flags: &[f64], expected: &[f64], tol: f64) -> bool {
    flags.len() == expected.len()
        && expected.iter().all(|e| flags.iter().filter(|f| (*f - e).abs() <= tol).count() == 1)
}

fn dedup_sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup();
    v
}

fn flags(report: &DetectionReport<f64>) -> Vec<Flag> {
    report.flagged.iter().map(|p| Flag { t: p.t, slope: p.slope }).collect()
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check { name: name.to_string(), passed, detail }
}

struct Analysis {
    report: DetectionReport<f64>,
    scalogram: Scalogram<f64>,
    stationary: Vec<f64>,
    degenerate: bool,
}

fn analyse(curve: &CorrelationCurve<f64>, params: &DetectParams<f64>) -> Result<Analysis, CliError> {
    let report = detect_singular_support(curve, params)?;
    let scalogram = combined_scalogram(curve, params)?;
    let peak = curve.values.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    let stat = stationary_point_estimator(curve, 1e-9 * peak.max(1.0))?;
    Ok(Analysis { report, scalogram, stationary: stat.roots.clone(), degenerate: stat.degenerate() })
}

/// Correlation of two delta waves of speeds 1 and `γ` restricted to the station.
fn case1_curve(c: &ExperimentConfig, gamma: f64, grid: &TimeGrid<f64>) -> Result<CorrelationCurve<f64>, CliError> {
    let u = restrict_to_station(&build_field(&FieldSpec::new(FieldKind::DeltaTravel, 1.0))?, c.x)?;
    let v = restrict_to_station(&build_field(&FieldSpec::new(FieldKind::DeltaTravel, gamma))?, c.x)?;
    Ok(correlate_regularized(&u, &v, &Mollifier::new(c.mollifier), c.epsilon, grid)?)
}

/// True shifts, artifacts and the largest deviation from the exact same-branch shifts.
type ShiftParts = (Vec<f64>, Vec<f64>, Option<f64>);

fn shift_section(c: &ExperimentConfig, a: &Analysis, dt: f64) -> Result<ShiftParts, CliError> {
    let same = c.x * (1.0 - 1.0 / c.gamma);
    let expected = dedup_sorted(vec![-same, same]);
    if a.report.flagged.is_empty() {
        return Ok((vec![], vec![], None));
    }
    let est = estimate_shift_from_singsupp(&a.report, c.x, Some(c.gamma), 2.0 * dt)?;
    let shifts: Vec<f64> = est.shifts.iter().map(|s| s.value).collect();
    let dev = shifts
        .iter()
        .map(|s| expected.iter().map(|e| (s - e).abs()).fold(f64::INFINITY, f64::min))
        .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.max(d))));
    Ok((shifts, est.artifacts, dev))
}

pub fn run_case(c: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let grid = TimeGrid::new(c.t_min, c.t_max, c.n)?;
    let dt = grid.spacing();
    let params = detect_params(c);
    let same = c.x * (1.0 - 1.0 / c.gamma);
    let cross = c.x * (1.0 + 1.0 / c.gamma);
    let mut checks = Vec::new();
    let mut sweep = None;
    let mut max_deviation = None;

    let (curve, analysis, true_shifts, artifacts) = match c.case {
        Case::Case1 | Case::Sweep => {
            let curve = case1_curve(c, c.gamma, &grid)?;
            let a = analyse(&curve, &params)?;
            let (shifts, artifacts, dev) = shift_section(c, &a, dt)?;
            if c.case == Case::Case1 {
                let ok = shifts.len() == 1 && (shifts[0] + same).abs() <= 2.0 * dt;
                checks.push(check("true shift", ok, format!("{shifts:?} vs {} within 2Δt", -same)));
                max_deviation = dev;
            } else {
                let rho = Mollifier::new(c.mollifier);
                let range = (c.sweep_gamma_min, c.sweep_gamma_max);
                let r = implicit_gamma_sweep(c.x, range, c.epsilon, c.sweep_steps, &rho)?;
                checks.push(check(
                    "sweep deviation",
                    r.max_deviation <= 1e-4,
                    format!("{:e} <= 1e-4", r.max_deviation),
                ));
                max_deviation = Some(r.max_deviation);
                sweep = Some(SweepReport { gamma: r.gamma, t: r.t, dtdgamma: r.dtdgamma });
            }
            (curve, a, shifts, artifacts)
        }
        Case::Case2 => {
            let cf = correlate_closed_form(CorrelationCase::DeltaShock, c.x, c.gamma)?;
            let curve = cf.sample(&grid, &Mollifier::new(c.mollifier), c.epsilon, c.x, c.gamma)?;
            let a = analyse(&curve, &params)?;
            let tbar = cf.location();
            let times = a.report.times();
            checks.push(check("no isolated stationary point", a.stationary.is_empty(), format!("{:?}", a.stationary)));
            let ok = matches_exactly(&times, &[tbar], 2.0 * dt);
            checks.push(check("singular support", ok, format!("{times:?} vs [{tbar}] within 2Δt")));
            let (shifts, artifacts, dev) = shift_section(c, &a, dt)?;
            max_deviation = dev;
            (curve, a, shifts, artifacts)
        }
        Case::Case3 => {
            let qp = QuadParams { xi_max: c.xi_max, tol: c.tol, ..QuadParams::default() };
            let curve = correlate_oi(c.x, c.gamma, &CutoffChi::default(), &grid, &qp)?;
            let a = analyse(&curve, &params)?;
            let expected = dedup_sorted(vec![-cross, -same, same, cross]);
            let times = a.report.times();
            let ok = matches_exactly(&times, &expected, 2.0 * dt);
            checks.push(check("singular support", ok, format!("{times:?} vs {expected:?} within 2Δt")));
            let (shifts, artifacts, dev) = shift_section(c, &a, dt)?;
            let want = dedup_sorted(vec![-same, same]);
            checks.push(check(
                "true shifts",
                matches_exactly(&shifts, &want, 2.0 * dt),
                format!("{shifts:?} vs {want:?}"),
            ));
            max_deviation = dev;
            (curve, a, shifts, artifacts)
        }
        Case::Detect => {
            // Smooth background, a delta mollified over two spacings at -1 and a unit step at +1.
            let rho = Mollifier::gaussian();
            let signal = SampledSignal::from_fn(grid, |t| {
                let step = if t > 1.0 {
                    1.0
                } else if t == 1.0 {
                    0.5
                } else {
                    0.0
                };
                Complex::new((-t * t / 0.5).exp() + rho.scaled(t + 1.0, 2.0 * dt) + step, 0.0)
            });
            let meta = CurveMeta {
                method: CorrelationMethod::ClosedForm,
                station: c.x,
                gamma: c.gamma,
                eps: Some(2.0 * dt),
                tol: None,
                xi_max: None,
            };
            let curve = CorrelationCurve::new(grid, signal.values, vec![0.0; grid.n], meta)?;
            let a = analyse(&curve, &params)?;
            let times = a.report.times();
            let ok = matches_exactly(&times, &[-1.0, 1.0], 2.0 * dt);
            checks.push(check("singular support", ok, format!("{times:?} vs [-1, 1] within 2Δt")));
            (curve, a, vec![], vec![])
        }
    };

    let report = Report {
        case: c.case.name(),
        x: c.x,
        gamma: c.gamma,
        flagged: flags(&analysis.report),
        true_shifts,
        artifacts,
        stationary_candidates: analysis.stationary,
        stationary_degenerate: analysis.degenerate,
        sweep,
        max_deviation,
        checks,
    };
    Ok(Artifacts { curve, scalogram: analysis.scalogram, report })
}
