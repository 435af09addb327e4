#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wavecorr::acceptance::{calibration_table, run_all};
use wavecorr::detect::DetectParams;

use config::{parse_pairs, ExperimentConfig, Overrides};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<wavecorr::Error> for CliError {
    fn from(e: wavecorr::Error) -> Self {
        use wavecorr::Error::*;
        match e {
            ToleranceUnreachable { .. } | SolverFailure(_) => Self::Numerical(e.to_string()),
            _ => Self::Validation(e.to_string()),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            Self::Validation(_) | Self::Io(_) => 1,
            Self::Numerical(_) => 3,
        }
    }
}

const ACCEPTANCE_FAILURE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "wavecorr",
    version,
    about = "Cross-correlation of wave traces and singular-support detection",
    allow_negative_numbers = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a key = value config file.
    #[command(allow_negative_numbers = true)]
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        x: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        case: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the detector calibration table.
    Calibrate {
        /// Also write the table as CSV to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance suite.
    Selftest,
}

fn run(config: PathBuf, overrides: Overrides) -> Result<bool, CliError> {
    let text =
        std::fs::read_to_string(&config).map_err(|e| CliError::Validation(format!("{}: {e}", config.display())))?;
    let mut cfg = ExperimentConfig::from_pairs(&parse_pairs(&text)?)?;
    cfg.apply(&overrides)?;
    cfg.validate()?;
    let artifacts = run::run_case(&cfg)?;
    for path in output::write_artifacts(&cfg.out, &artifacts)? {
        println!("wrote {}", path.display());
    }
    for c in &artifacts.report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(artifacts.report.passed())
}

fn calibrate(out: Option<PathBuf>) -> Result<bool, CliError> {
    let rows = calibration_table(&DetectParams::default())?;
    let mut table = String::from("signal,slope,band_lo,band_hi,within_band\n");
    for r in &rows {
        table.push_str(&format!("{},{:e},{:e},{:e},{}\n", r.signal, r.slope, r.band.0, r.band.1, r.within_band()));
    }
    print!("{table}");
    if let Some(path) = out {
        std::fs::write(&path, &table).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(rows.iter().all(|r| r.within_band()))
}

fn selftest() -> bool {
    let outcomes = run_all();
    for o in &outcomes {
        println!("{o}");
    }
    outcomes.iter().all(|o| o.passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Run { config, x, gamma, epsilon, case, out } => {
            run(config, Overrides { case, x, gamma, epsilon, out })
        }
        Command::Calibrate { out } => calibrate(out),
        Command::Selftest => Ok(selftest()),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(ACCEPTANCE_FAILURE),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
