//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use wavecorr::regularize::MollifierKind;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    Case1,
    Case2,
    Case3,
    Sweep,
    Detect,
}

impl Case {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Case1 => "case1",
            Self::Case2 => "case2",
            Self::Case3 => "case3",
            Self::Sweep => "sweep",
            Self::Detect => "detect",
        }
    }
}

impl FromStr for Case {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "case1" => Ok(Self::Case1),
            "case2" => Ok(Self::Case2),
            "case3" => Ok(Self::Case3),
            "sweep" => Ok(Self::Sweep),
            "detect" => Ok(Self::Detect),
            other => Err(CliError::Validation(format!(
                "unknown case '{other}' (expected case1, case2, case3, sweep or detect)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub case: Case,
    pub x: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub mollifier: MollifierKind,
    pub t_min: f64,
    pub t_max: f64,
    pub n: usize,
    pub k_min: u32,
    pub k_max: u32,
    pub xi_max: f64,
    pub tol: f64,
    pub slope_threshold: f64,
    pub merge_radius: Option<f64>,
    pub sweep_gamma_min: f64,
    pub sweep_gamma_max: f64,
    pub sweep_steps: usize,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            case: Case::Case3,
            x: 1.0,
            gamma: 2.0,
            epsilon: 0.025,
            mollifier: MollifierKind::Gaussian,
            t_min: -4.0,
            t_max: 4.0,
            n: 8193,
            k_min: 1,
            k_max: 6,
            xi_max: 1e3,
            tol: 1e-8,
            slope_threshold: 1.5,
            merge_radius: None,
            sweep_gamma_min: 0.8,
            sweep_gamma_max: 1.25,
            sweep_steps: 41,
            out: PathBuf::from("out"),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub case: Option<String>,
    pub x: Option<f64>,
    pub gamma: Option<f64>,
    pub epsilon: Option<f64>,
    pub out: Option<PathBuf>,
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.parse().map_err(|_| CliError::Validation(format!("{key}: cannot parse '{value}'")))
}

/// Parses `key = value` lines; `#` starts a comment. Unknown and repeated keys are errors.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut pairs = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Validation(format!("line {}: expected key = value", lineno + 1)));
        };
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        if pairs.insert(k.clone(), v).is_some() {
            return Err(CliError::Validation(format!("line {}: duplicate key '{k}'", lineno + 1)));
        }
    }
    Ok(pairs)
}

impl ExperimentConfig {
    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self, CliError> {
        let mut c = Self::default();
        for (k, v) in pairs {
            match k.as_str() {
                "case" => c.case = v.parse()?,
                "x" => c.x = parse_num(k, v)?,
                "gamma" => c.gamma = parse_num(k, v)?,
                "epsilon" => c.epsilon = parse_num(k, v)?,
                "mollifier" => {
                    c.mollifier = match v.as_str() {
                        "gaussian" => MollifierKind::Gaussian,
                        "bump" => MollifierKind::CompactBump,
                        other => {
                            return Err(CliError::Validation(format!(
                                "mollifier: unknown kind '{other}' (expected gaussian or bump)"
                            )))
                        }
                    }
                }
                "t_min" => c.t_min = parse_num(k, v)?,
                "t_max" => c.t_max = parse_num(k, v)?,
                "n" => c.n = parse_num(k, v)?,
                "k_min" => c.k_min = parse_num(k, v)?,
                "k_max" => c.k_max = parse_num(k, v)?,
                "xi_max" => c.xi_max = parse_num(k, v)?,
                "tol" => c.tol = parse_num(k, v)?,
                "slope_threshold" => c.slope_threshold = parse_num(k, v)?,
                "merge_radius" => c.merge_radius = Some(parse_num(k, v)?),
                "sweep_gamma_min" => c.sweep_gamma_min = parse_num(k, v)?,
                "sweep_gamma_max" => c.sweep_gamma_max = parse_num(k, v)?,
                "sweep_steps" => c.sweep_steps = parse_num(k, v)?,
                "out" => c.out = PathBuf::from(v),
                other => return Err(CliError::Validation(format!("unknown key '{other}'"))),
            }
        }
        Ok(c)
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), CliError> {
        if let Some(case) = &o.case {
            self.case = case.parse()?;
        }
        if let Some(x) = o.x {
            self.x = x;
        }
        if let Some(g) = o.gamma {
            self.gamma = g;
        }
        if let Some(e) = o.epsilon {
            self.epsilon = e;
        }
        if let Some(out) = &o.out {
            self.out = out.clone();
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |m: &str| Err(CliError::Validation(m.to_string()));
        let finite =
            [self.x, self.gamma, self.epsilon, self.t_min, self.t_max, self.xi_max, self.tol, self.slope_threshold];
        if finite.iter().any(|v| !v.is_finite()) {
            return fail("numeric parameters must be finite");
        }
        if self.x <= 0.0 {
            return fail("x must be positive");
        }
        if self.gamma <= 0.0 {
            return fail("gamma must be positive");
        }
        if self.epsilon <= 0.0 {
            return fail("epsilon must be positive");
        }
        if self.t_min >= self.t_max || self.n < 2 {
            return fail("grid needs t_min < t_max and n >= 2");
        }
        if self.k_min < 1 || self.k_min > self.k_max || self.k_max > 30 {
            return fail("scales need 1 <= k_min <= k_max <= 30");
        }
        if self.xi_max <= 0.0 {
            return fail("xi_max must be positive");
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return fail("tol must lie in (0, 1)");
        }
        if let Some(m) = self.merge_radius {
            if !(m >= 0.0 && m.is_finite()) {
                return fail("merge_radius must be nonnegative");
            }
        }
        if !(self.sweep_gamma_min > 0.0
            && self.sweep_gamma_min <= 1.0
            && self.sweep_gamma_max >= 1.0
            && self.sweep_gamma_max.is_finite())
        {
            return fail("sweep gamma range must lie in (0, ∞) and contain 1");
        }
        if self.sweep_steps < 2 {
            return fail("sweep_steps must be at least 2");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_overrides() {
        let pairs =
            parse_pairs("# demo\ncase = case1\nx = 2 # station\nmollifier=bump\n\nmerge_radius = 0.01\n").unwrap();
        let mut c = ExperimentConfig::from_pairs(&pairs).unwrap();
        assert_eq!(c.case, Case::Case1);
        assert_eq!(c.x, 2.0);
        assert_eq!(c.mollifier, MollifierKind::CompactBump);
        assert_eq!(c.merge_radius, Some(0.01));
        c.apply(&Overrides { gamma: Some(0.5), ..Default::default() }).unwrap();
        assert_eq!(c.gamma, 0.5);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_pairs("x 1").is_err());
        assert!(parse_pairs("x = 1\nx = 2").is_err());
        assert!(ExperimentConfig::from_pairs(&parse_pairs("speed = 1").unwrap()).is_err());
        assert!(ExperimentConfig::from_pairs(&parse_pairs("x = one").unwrap()).is_err());
        assert!(ExperimentConfig::from_pairs(&parse_pairs("case = case9").unwrap()).is_err());
        let c = ExperimentConfig { gamma: -1.0, ..Default::default() };
        assert!(c.validate().is_err());
        let c = ExperimentConfig { t_min: 1.0, t_max: 0.0, ..Default::default() };
        assert!(c.validate().is_err());
    }
}
