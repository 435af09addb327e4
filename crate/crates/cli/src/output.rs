//! Artifact writers. Floats use Rust's shortest round-trip `{:e}` form.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use wavecorr::correlate::CorrelationCurve;
use wavecorr::detect::Scalogram;

use crate::run::{Artifacts, Report};
use crate::CliError;

pub fn curve_csv(curve: &CorrelationCurve<f64>) -> String {
    let mut s = String::from("t,c_re,c_im,err_bound\n");
    for (i, (v, e)) in curve.values.iter().zip(&curve.error_bounds).enumerate() {
        let _ = writeln!(s, "{:e},{:e},{:e},{:e}", curve.grid.point(i), v.re, v.im, e);
    }
    s
}

pub fn scalogram_csv(sc: &Scalogram<f64>) -> String {
    let mut s = String::from("t,r,absW\n");
    for i in 0..sc.grid.n {
        let t = sc.grid.point(i);
        for (k, r) in sc.scales.iter().enumerate() {
            let _ = writeln!(s, "{t:e},{r:e},{:e}", sc.abs[k][i]);
        }
    }
    s
}

pub fn report_json(report: &Report) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(report).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn write(path: PathBuf, body: &str) -> Result<PathBuf, CliError> {
    fs::write(&path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

/// Writes `curve.csv`, `scalogram.csv` and `report.json` into `dir`.
pub fn write_artifacts(dir: &Path, a: &Artifacts) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    Ok(vec![
        write(dir.join("curve.csv"), &curve_csv(&a.curve))?,
        write(dir.join("scalogram.csv"), &scalogram_csv(&a.scalogram))?,
        write(dir.join("report.json"), &report_json(&a.report)?)?,
    ])
}
