//! `leakage` command-line front end: fit flat-prior regressions to CSV
//! data, audit their predictive leakage against a declared support, check
//! falsification, run calibration diagnostics, simulate datasets and emit
//! predictive density curves.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data or model errors.

mod commands;
mod document;
mod grid;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use document::{
    AuditReportDocument, CalibrationSummary, ErrorDocument, FalsifyDocument, FitSummary, LeakDocument,
    LeakageSection, Seeds,
};
pub use grid::parse_grid;

/// Seed used by randomized subcommands when `--seed` is absent.
pub const DEFAULT_SEED: u64 = leakage_core::predictive::DEFAULT_SEED;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "leakage", version, about = "Audit Bayesian predictive models for probability leakage")]
pub struct Cli {
    /// Print errors as a JSON object on stderr.
    #[arg(long, global = true)]
    pub json_errors: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct ModelArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub response: String,
    /// Comma-separated covariate columns; omit for the intercept-only model.
    #[arg(long, value_delimiter = ',')]
    pub covariates: Vec<String>,
    #[arg(long)]
    pub no_intercept: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Point,
    Interval,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimKind {
    Truncated,
    Callcenter,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the flat-prior regression and print its summary.
    Fit {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Leakage of the posterior predictive at one or more covariate points.
    Leak {
        #[command(flatten)]
        model: ModelArgs,
        /// Support declared by the evidence, e.g. "[0,inf)" or "lattice(0,inf,1)".
        #[arg(long)]
        support: String,
        /// `medians`, `minima`, or a JSON object (or array of objects) of covariate values.
        #[arg(long, default_value = "medians")]
        at: String,
    },
    /// Leakage over a covariate grid, as CSV.
    LeakProfile {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        support: String,
        /// Grid such as "calls=110:2995:100;location=A,B".
        #[arg(long)]
        grid: String,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check whether observed outcomes falsify the fitted model.
    Falsify {
        #[command(flatten)]
        model: ModelArgs,
        /// CSV of new cases with the response column; defaults to the training data.
        #[arg(long)]
        observed: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "point")]
        mode: ModeArg,
        /// Measurement resolution for interval mode.
        #[arg(long)]
        resolution: Option<f64>,
    },
    /// Fit on a seeded training split and run calibration diagnostics on the rest.
    Calibrate {
        #[command(flatten)]
        model: ModelArgs,
        /// Fraction of rows held out.
        #[arg(long, default_value_t = 0.5)]
        holdout: f64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Directory for the report JSON and curve CSVs.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Generate a synthetic dataset as CSV.
    Simulate {
        #[arg(value_enum)]
        kind: SimKind,
        /// JSON configuration; defaults are used for missing files.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the seed in the configuration.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Full audit document plus predictive density curves.
    Report {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        support: String,
        /// CSV with columns y, density_null, one density per fitted curve, marker.
        #[arg(long)]
        out_curves: Option<PathBuf>,
        #[arg(long, default_value_t = 2001)]
        points: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] leakage_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            _ => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Model(_) => "model",
            CliError::Io { .. } => "io",
            CliError::Json(_) => "json",
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn report_error(json: bool, kind: &str, message: &str, code: i32, err: &mut dyn Write) {
    if json {
        let doc = ErrorDocument {
            error: message.trim_end().to_owned(),
            kind: kind.to_owned(),
            exit_code: code,
        };
        let _ = writeln!(err, "{}", serde_json::to_string(&doc).unwrap_or_default());
    } else {
        let _ = writeln!(err, "error: {}", message.trim_end());
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let json = args.iter().any(|a| a == "--json-errors");
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            if json {
                report_error(true, "usage", &e.kind().to_string(), 1, err);
            } else {
                let _ = write!(err, "{e}");
            }
            return 1;
        }
    };
    match commands::execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let code = e.exit_code();
            report_error(cli.json_errors, e.kind(), &e.to_string(), code, err);
            code
        }
    }
}
