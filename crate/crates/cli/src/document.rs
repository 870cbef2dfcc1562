//! JSON documents emitted by the subcommands.

use leakage_core::evidence::{Evidence, LeakageReport};
use leakage_core::falsification::{Mode, Observation};
use leakage_core::regression::{FitResult, ModelSpec};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitSummary {
    pub spec: ModelSpec,
    pub n: usize,
    pub p: usize,
    pub df: f64,
    pub columns: Vec<String>,
    pub beta_hat: Vec<f64>,
    pub s2: f64,
}

impl FitSummary {
    pub fn new(spec: &ModelSpec, fit: &FitResult) -> Self {
        Self {
            spec: spec.clone(),
            n: fit.n,
            p: fit.p,
            df: fit.df(),
            columns: fit.column_names.clone(),
            beta_hat: fit.beta_hat.clone(),
            s2: fit.s2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeakDocument {
    pub tool_version: String,
    pub model: FitSummary,
    pub support: Evidence,
    pub at: String,
    pub reports: Vec<LeakageReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FalsifyDocument {
    pub tool_version: String,
    pub mode: Mode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
    pub n_observations: usize,
    pub falsified: bool,
    /// Zero-based row of the first falsifying observation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_row: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Observation>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Seeds {
    pub calibration: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeakageSection {
    /// One report per categorical level combination.
    pub medians: Vec<LeakageReport>,
    pub minima: Vec<LeakageReport>,
    /// Intercept-only model on the same response.
    pub null_model: LeakageReport,
}

/// In-sample calibration of the fitted model on its training rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationSummary {
    pub n: usize,
    pub max_probability_deviation: f64,
    pub max_marginal_gap: f64,
    pub mean_crps: Option<f64>,
    pub falsified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReportDocument {
    pub tool_version: String,
    pub seeds: Seeds,
    pub model: FitSummary,
    pub support: Evidence,
    pub leakage: LeakageSection,
    pub falsification: FalsifyDocument,
    pub calibration: CalibrationSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorDocument {
    pub error: String,
    pub kind: String,
    pub exit_code: i32,
}
