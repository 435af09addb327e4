use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Least-squares line through `(log r, log |W|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLogFit<T> {
    pub slope: T,
    pub intercept: T,
    /// Root-mean-square residual in log space.
    pub residual: T,
}

pub fn loglog_regression<T: Real>(points: &[(T, T)]) -> Result<LogLogFit<T>> {
    if points.len() < 2 {
        return Err(invalid("log-log regression needs at least two points"));
    }
    if points.iter().any(|&(r, w)| !(r > T::zero()) || !(w > T::zero())) {
        return Err(invalid("log-log regression needs positive abscissae and ordinates"));
    }
    let n = T::from_usize_lossy(points.len());
    let logs: Vec<(T, T)> = points.iter().map(|&(r, w)| (r.ln(), w.ln())).collect();
    let mx = logs.iter().fold(T::zero(), |s, p| s + p.0) / n;
    let my = logs.iter().fold(T::zero(), |s, p| s + p.1) / n;
    let sxx = logs.iter().fold(T::zero(), |s, p| s + (p.0 - mx) * (p.0 - mx));
    if !(sxx > T::epsilon() * n) {
        return Err(invalid("degenerate abscissae in log-log regression"));
    }
    let sxy = logs.iter().fold(T::zero(), |s, p| s + (p.0 - mx) * (p.1 - my));
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss = logs.iter().fold(T::zero(), |s, p| {
        let e = p.1 - (intercept + slope * p.0);
        s + e * e
    });
    Ok(LogLogFit { slope, intercept, residual: (ss / n).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn exact_power_laws() {
        let pts: Vec<(f64, f64)> = (1..=6).map(|k| 2f64.powi(-k)).map(|r| (r, 1.0 / r)).collect();
        let fit = loglog_regression(&pts).unwrap();
        assert_abs_diff_eq!(fit.slope, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.residual, 0.0, epsilon = 1e-12);

        let pts: Vec<(f64, f64)> = (1..=6).map(|k| 2f64.powi(-k)).map(|r| (r, 3.0 * r * r)).collect();
        let fit = loglog_regression(&pts).unwrap();
        assert_abs_diff_eq!(fit.slope, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.intercept, 3f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn noisy_power_law_slope() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let pts: Vec<(f64, f64)> = (1..=8)
            .map(|k| 2f64.powi(-k))
            .map(|r| (r, r.powf(1.5) * (1.0 + 0.01 * rng.gen_range(-1.0..1.0))))
            .collect();
        let fit = loglog_regression(&pts).unwrap();
        assert!((fit.slope - 1.5).abs() < 0.05);
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(loglog_regression(&[(0.5_f64, 1.0), (0.5, 2.0)]).is_err());
        assert!(loglog_regression(&[(0.5_f64, 1.0)]).is_err());
        assert!(loglog_regression(&[(0.5_f64, 0.0), (0.25, 1.0)]).is_err());
    }
}
