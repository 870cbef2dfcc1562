//! Seeded synthetic data: regression data whose truth respects a lower
//! support bound, a two-location call-center-like dataset, and the
//! held-out calibration experiment built on the former.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::calibration::{crps, pit, probability_calibration, ForecastCase, ProbabilityCurve};
use crate::error::{Error, Result};
use crate::evidence::{deserialize_lower, leakage, serialize_bound, Evidence};
use crate::predictive::{seeded_rng, PredictiveDistribution, TruncatedNormal, DEFAULT_SEED};
use crate::regression::{fit_dataset, reference_points, Column, CovariatePoint, Dataset, ModelSpec, ReferenceStat};
use crate::special::{ks_critical_5pct, ks_statistic};

/// Truncation regions with less normal mass than this are rejected.
pub const MIN_RETAINED_MASS: f64 = 1e-12;

/// Normal linear regression truth, optionally truncated below.
///
/// `coefficients[0]` is the intercept; `coefficients[j]` multiplies
/// covariate `xj`, drawn uniformly from `covariate_ranges[j - 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub coefficients: Vec<f64>,
    pub noise_sd: f64,
    #[serde(serialize_with = "serialize_bound", deserialize_with = "deserialize_lower")]
    pub support_lower: f64,
    pub covariate_ranges: Vec<(f64, f64)>,
    pub seed: u64,
}

impl SimConfig {
    /// Truth truncated at 0 with a fitted leakage floor near 0.067.
    pub fn default_truncated() -> Self {
        Self {
            n: 10_000,
            coefficients: vec![-1.0, 0.2],
            noise_sd: 1.0,
            support_lower: 0.0,
            covariate_ranges: vec![(0.0, 5.0)],
            seed: DEFAULT_SEED,
        }
    }

    /// Same regression without truncation.
    pub fn default_control() -> Self {
        Self {
            support_lower: f64::NEG_INFINITY,
            ..Self::default_truncated()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 4 {
            return Err(Error::InvalidParameter(format!("n must be at least 4, got {}", self.n)));
        }
        if !(self.noise_sd.is_finite() && self.noise_sd > 0.0) {
            return Err(Error::InvalidParameter(format!("noise_sd must be positive, got {}", self.noise_sd)));
        }
        if self.covariate_ranges.is_empty() {
            return Err(Error::InvalidParameter("at least one covariate range is required".into()));
        }
        for &(lo, hi) in &self.covariate_ranges {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidParameter(format!("covariate range ({lo}, {hi}) is empty")));
            }
        }
        if self.coefficients.len() != self.covariate_ranges.len() + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.covariate_ranges.len() + 1,
                found: self.coefficients.len(),
            });
        }
        if self.coefficients.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidParameter("coefficients must be finite".into()));
        }
        if self.support_lower.is_nan() || self.support_lower == f64::INFINITY {
            return Err(Error::InvalidParameter("support_lower must be below +inf".into()));
        }
        Ok(())
    }

    pub fn covariate_names(&self) -> Vec<String> {
        (1..=self.covariate_ranges.len()).map(|j| format!("x{j}")).collect()
    }

    pub fn model_spec(&self) -> ModelSpec {
        ModelSpec::new("y", self.covariate_names())
    }

    fn mean_at(&self, x: &[f64]) -> f64 {
        self.coefficients[0] + x.iter().zip(&self.coefficients[1..]).map(|(a, b)| a * b).sum::<f64>()
    }

    /// True conditional distribution of `y` at covariates `x`.
    pub fn truth_at(&self, x: &[f64]) -> Result<PredictiveDistribution> {
        let mean = self.mean_at(x);
        let t = TruncatedNormal::new(mean, self.noise_sd, self.support_lower, f64::INFINITY)
            .map_err(|_| infeasible(mean, self.support_lower))?;
        if t.retained_mass() < MIN_RETAINED_MASS {
            return Err(infeasible(mean, self.support_lower));
        }
        if self.support_lower == f64::NEG_INFINITY {
            PredictiveDistribution::normal(mean, self.noise_sd)
        } else {
            Ok(PredictiveDistribution::TruncatedNormal(t))
        }
    }
}

fn infeasible(mean: f64, lower: f64) -> Error {
    Error::Infeasible(format!(
        "truncation at {lower} keeps less than {MIN_RETAINED_MASS} of the mass at mean {mean}"
    ))
}

/// Covariates uniform over their ranges and `y` drawn by inversion from the
/// truncated normal truth. Columns `x1..xk, y`.
pub fn gen_truncated_regression(cfg: &SimConfig) -> Result<Dataset> {
    cfg.validate()?;
    let k = cfg.covariate_ranges.len();
    let mut rng = seeded_rng(cfg.seed);
    let mut xs = vec![Vec::with_capacity(cfg.n); k];
    let mut ys = Vec::with_capacity(cfg.n);
    let mut row = vec![0.0; k];
    for _ in 0..cfg.n {
        for (j, &(lo, hi)) in cfg.covariate_ranges.iter().enumerate() {
            row[j] = rng.random_range(lo..hi);
            xs[j].push(row[j]);
        }
        let mean = cfg.mean_at(&row);
        let truth = TruncatedNormal::new(mean, cfg.noise_sd, cfg.support_lower, f64::INFINITY)
            .map_err(|_| infeasible(mean, cfg.support_lower))?;
        if truth.retained_mass() < MIN_RETAINED_MASS {
            return Err(infeasible(mean, cfg.support_lower));
        }
        ys.push(truth.draw(&mut rng));
    }
    let mut columns: Vec<Column> = cfg
        .covariate_names()
        .into_iter()
        .zip(xs)
        .map(|(name, v)| Column::numeric(name, v))
        .collect();
    columns.push(Column::numeric("y", ys));
    Dataset::new(columns)
}

/// Two help lines with a positive calls effect, a positive absentee effect
/// and an offset for location B; abandonment truncated below at `y_floor`.
///
/// Calls and absentees are log-normal around their medians and clipped to
/// their ranges. In each location one row carries the minimum and one the
/// maximum of each range, so both ranges are attained exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CallCenterConfig {
    pub per_location_n: usize,
    pub calls_range: (f64, f64),
    pub absentee_range: (u32, u32),
    pub y_floor: f64,
    pub seed: u64,
    pub calls_median: f64,
    pub calls_log_sd: f64,
    pub absentee_median: f64,
    pub absentee_log_sd: f64,
    pub intercept: f64,
    pub calls_effect: f64,
    pub absentee_effect: f64,
    pub location_b_offset: f64,
    pub noise_sd: f64,
}

impl Default for CallCenterConfig {
    /// Coefficients from `examples/tune_callcenter.rs`.
    fn default() -> Self {
        Self {
            per_location_n: 52,
            calls_range: (110.0, 2995.0),
            absentee_range: (1, 14),
            y_floor: 0.0,
            seed: DEFAULT_SEED,
            calls_median: 1200.0,
            calls_log_sd: 0.28,
            absentee_median: 5.0,
            absentee_log_sd: 0.21,
            intercept: -5.1,
            calls_effect: 0.00173,
            absentee_effect: 0.32,
            location_b_offset: 2.93,
            noise_sd: 1.0,
        }
    }
}

pub const LOCATIONS: [&str; 2] = ["A", "B"];

impl CallCenterConfig {
    pub fn validate(&self) -> Result<()> {
        let (c_lo, c_hi) = self.calls_range;
        let (a_lo, a_hi) = self.absentee_range;
        if self.per_location_n < 4 {
            return Err(Error::InvalidParameter("per_location_n must be at least 4".into()));
        }
        if !(c_lo.is_finite() && c_hi.is_finite() && c_lo < c_hi) {
            return Err(Error::InvalidParameter(format!("calls range ({c_lo}, {c_hi}) is empty")));
        }
        if a_lo >= a_hi {
            return Err(Error::InvalidParameter(format!("absentee range ({a_lo}, {a_hi}) is empty")));
        }
        for (name, v) in [
            ("noise_sd", self.noise_sd),
            ("calls_median", self.calls_median),
            ("absentee_median", self.absentee_median),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("calls_log_sd", self.calls_log_sd), ("absentee_log_sd", self.absentee_log_sd)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be nonnegative, got {v}")));
            }
        }
        if !self.y_floor.is_finite() {
            return Err(Error::InvalidParameter("y_floor must be finite".into()));
        }
        Ok(())
    }

    pub fn model_spec() -> ModelSpec {
        ModelSpec::new("abandonment", ["calls", "absentees", "location"])
    }

    pub fn mean_at(&self, calls: f64, absentees: f64, location_b: bool) -> f64 {
        self.intercept
            + self.calls_effect * calls
            + self.absentee_effect * absentees
            + if location_b { self.location_b_offset } else { 0.0 }
    }
}

/// Columns `abandonment, calls, absentees, location`, location A rows
/// first.
pub fn gen_callcenter_like(cfg: &CallCenterConfig) -> Result<Dataset> {
    cfg.validate()?;
    let mut rng = seeded_rng(cfg.seed);
    let (c_lo, c_hi) = cfg.calls_range;
    let (a_lo, a_hi) = (f64::from(cfg.absentee_range.0), f64::from(cfg.absentee_range.1));
    let m = cfg.per_location_n;
    let total = 2 * m;
    let (mut y, mut calls, mut absentees, mut location) = (
        Vec::with_capacity(total),
        Vec::with_capacity(total),
        Vec::with_capacity(total),
        Vec::with_capacity(total),
    );
    for (loc_index, loc) in LOCATIONS.iter().enumerate() {
        for i in 0..m {
            let zc: f64 = rng.sample(StandardNormal);
            let za: f64 = rng.sample(StandardNormal);
            let c = (cfg.calls_median * (cfg.calls_log_sd * zc).exp()).round().clamp(c_lo, c_hi);
            let a = (cfg.absentee_median * (cfg.absentee_log_sd * za).exp()).round().clamp(a_lo, a_hi);
            let (c, a) = match i {
                0 => (c_lo, a),
                1 => (c, a_lo),
                2 => (c_hi, a),
                3 => (c, a_hi),
                _ => (c, a),
            };
            let mean = cfg.mean_at(c, a, loc_index == 1);
            let truth = TruncatedNormal::new(mean, cfg.noise_sd, cfg.y_floor, f64::INFINITY)
                .map_err(|_| infeasible(mean, cfg.y_floor))?;
            if truth.retained_mass() < MIN_RETAINED_MASS {
                return Err(infeasible(mean, cfg.y_floor));
            }
            y.push(truth.draw(&mut rng));
            calls.push(c);
            absentees.push(a);
            location.push((*loc).to_owned());
        }
    }
    Dataset::new(vec![
        Column::numeric("abandonment", y),
        Column::numeric("calls", calls),
        Column::numeric("absentees", absentees),
        Column::categorical("location", location),
    ])
}

/// Leakage below `[y_floor, ∞)` of the fitted call-center regression at the
/// training medians and minima of the numeric covariates (per location),
/// and of the intercept-only model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CallCenterLeakage {
    pub median_a: f64,
    pub median_b: f64,
    pub minimum_a: f64,
    pub minimum_b: f64,
    pub null_model: f64,
}

pub fn callcenter_leakage(data: &Dataset, y_floor: f64) -> Result<CallCenterLeakage> {
    let spec = CallCenterConfig::model_spec();
    let fit = fit_dataset(data, &spec)?;
    let evidence = Evidence::at_least(y_floor)?;
    let at = |stat| -> Result<Vec<f64>> {
        reference_points(data, &spec, stat)?
            .iter()
            .map(|p| Ok(leakage(&fit.predictive_at_point(p)?, &evidence).leakage))
            .collect()
    };
    let medians = at(ReferenceStat::Median)?;
    let minima = at(ReferenceStat::Minimum)?;
    let null = fit_dataset(data, &ModelSpec::null(spec.response.clone()))?;
    Ok(CallCenterLeakage {
        median_a: medians[0],
        median_b: medians[1],
        minimum_a: minima[0],
        minimum_b: minima[1],
        null_model: leakage(&null.predictive_at(&[1.0])?, &evidence).leakage,
    })
}

/// Outcome of fitting on the first half of a simulated dataset and scoring
/// the second half. Fields tied to the support bound are `None` when the
/// truth is untruncated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub n_train: usize,
    pub n_holdout: usize,
    #[serde(serialize_with = "serialize_bound")]
    pub support_lower: f64,
    /// Smallest held-out leakage below the support bound.
    pub leakage_min: Option<f64>,
    pub leakage_mean: Option<f64>,
    pub probability_curve: ProbabilityCurve,
    /// PIT frequency at `leakage_min / 2`.
    pub frequency_at_half_min: Option<f64>,
    pub deviation_at_half_min: Option<f64>,
    pub pit_ks_statistic: f64,
    pub ks_critical_5pct: f64,
    /// Mean predictive CDF and pooled empirical CDF just below the bound.
    pub mean_predictive_cdf_at_bound: Option<f64>,
    pub empirical_cdf_below_bound: Option<f64>,
    pub mean_crps_model: Option<f64>,
    /// Mean CRPS of the true conditional distribution.
    pub mean_crps_truth: f64,
}

impl ExperimentReport {
    pub fn pit_uniformity_rejected(&self) -> bool {
        self.pit_ks_statistic > self.ks_critical_5pct
    }

    pub fn marginal_gap_at_bound(&self) -> Option<f64> {
        Some(self.mean_predictive_cdf_at_bound? - self.empirical_cdf_below_bound?)
    }
}

/// Fits the flat-prior regression on the first `n/2` rows, then computes
/// held-out PITs, leakage below the bound, the probability-calibration
/// curve at `levels` (plus `leakage_min / 2`), and model vs truth CRPS.
pub fn impossibility_experiment(cfg: &SimConfig, levels: &[f64]) -> Result<ExperimentReport> {
    let data = gen_truncated_regression(cfg)?;
    let n_train = cfg.n / 2;
    let train = data.select_rows(&(0..n_train).collect::<Vec<_>>());
    let fit = fit_dataset(&train, &cfg.model_spec())?;
    let names = cfg.covariate_names();
    let columns: Vec<&[f64]> = names
        .iter()
        .map(|n| data.numeric(n))
        .collect::<Result<_>>()?;
    let ys = data.numeric("y")?;

    let truncated = cfg.support_lower.is_finite();
    let evidence = if truncated {
        Some(Evidence::at_least(cfg.support_lower)?)
    } else {
        None
    };

    let mut cases = Vec::with_capacity(cfg.n - n_train);
    let mut leakages = Vec::new();
    let mut crps_truth = 0.0;
    let mut row = vec![0.0; names.len()];
    for i in n_train..cfg.n {
        let mut point = CovariatePoint::new();
        for (j, name) in names.iter().enumerate() {
            row[j] = columns[j][i];
            point.insert(name.clone(), row[j]);
        }
        let predictive = fit.predictive_at_point(&point)?;
        if let Some(e) = &evidence {
            leakages.push(leakage(&predictive, e).leakage);
        }
        crps_truth += crps(&cfg.truth_at(&row)?, ys[i])?;
        cases.push(ForecastCase::new(predictive, ys[i])?);
    }
    let n_holdout = cases.len();

    let pits = pit(&cases, cfg.seed)?;
    let leakage_min = leakages.iter().copied().reduce(f64::min);
    let leakage_mean = (!leakages.is_empty()).then(|| leakages.iter().sum::<f64>() / leakages.len() as f64);
    let half = leakage_min.map(|l| 0.5 * l).filter(|&p| p > 0.0);
    let mut all_levels = levels.to_vec();
    all_levels.extend(half);
    let probability_curve = probability_calibration(&pits, &all_levels)?;
    let at_half = half.map(|p| {
        probability_curve
            .points
            .iter()
            .find(|pt| pt.level == p)
            .expect("level included")
            .frequency
    });

    let (mean_cdf, empirical_below) = if truncated {
        let bound = cfg.support_lower;
        let mean_cdf = cases.iter().map(|c| c.predictive.cdf(bound)).sum::<f64>() / n_holdout as f64;
        let below = cases.iter().filter(|c| c.observed < bound).count() as f64 / n_holdout as f64;
        (Some(mean_cdf), Some(below))
    } else {
        (None, None)
    };

    let mut crps_model = Some(0.0);
    for c in &cases {
        match crps(&c.predictive, c.observed) {
            Ok(s) => crps_model = crps_model.map(|t| t + s),
            Err(Error::CrpsUndefined) => crps_model = None,
            Err(e) => return Err(e),
        }
    }

    Ok(ExperimentReport {
        n_train,
        n_holdout,
        support_lower: cfg.support_lower,
        leakage_min,
        leakage_mean,
        frequency_at_half_min: at_half,
        deviation_at_half_min: half.zip(at_half).map(|(p, f)| (f - p).abs()),
        probability_curve,
        pit_ks_statistic: ks_statistic(&pits, |u| u.clamp(0.0, 1.0)),
        ks_critical_5pct: ks_critical_5pct(n_holdout),
        mean_predictive_cdf_at_bound: mean_cdf,
        empirical_cdf_below_bound: empirical_below,
        mean_crps_model: crps_model.map(|t| t / n_holdout as f64),
        mean_crps_truth: crps_truth / n_holdout as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncated_data_respects_bound() {
        let cfg = SimConfig {
            n: 500,
            ..SimConfig::default_truncated()
        };
        let d = gen_truncated_regression(&cfg).unwrap();
        assert_eq!(d.n_rows(), 500);
        assert!(d.numeric("y").unwrap().iter().all(|&y| y >= 0.0));
        assert_eq!(d, gen_truncated_regression(&cfg).unwrap());
    }

    #[test]
    fn infeasible_truncation() {
        let cfg = SimConfig {
            n: 10,
            coefficients: vec![-100.0, 0.0],
            ..SimConfig::default_truncated()
        };
        assert!(matches!(gen_truncated_regression(&cfg), Err(Error::Infeasible(_))));
    }

    #[test]
    fn config_json_infinite_bound() {
        let cfg = SimConfig::default_control();
        let json = serde_json::to_string(&cfg).unwrap();
        assert!(json.contains("\"-inf\""));
        let back: SimConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn callcenter_shape() {
        let d = gen_callcenter_like(&CallCenterConfig::default()).unwrap();
        assert_eq!(d.n_rows(), 104);
        let loc = d.column("location").unwrap();
        assert_eq!(loc.levels().unwrap(), vec!["A".to_owned(), "B".to_owned()]);
        let calls = d.numeric("calls").unwrap();
        assert!(calls.iter().all(|&c| (110.0..=2995.0).contains(&c)));
        let abs = d.numeric("absentees").unwrap();
        assert!(abs.iter().all(|&a| (1.0..=14.0).contains(&a) && a.fract() == 0.0));
        assert!(d.numeric("abandonment").unwrap().iter().all(|&y| y >= 0.0));
    }

    #[test]
    fn callcenter_default_leakage_windows() {
        let cfg = CallCenterConfig::default();
        let l = callcenter_leakage(&gen_callcenter_like(&cfg).unwrap(), cfg.y_floor).unwrap();
        println!("{l:?}");
        assert!((0.25..=0.50).contains(&l.median_a));
        assert!((0.005..=0.06).contains(&l.median_b));
        assert!(l.minimum_a >= 0.80);
        assert!((0.35..=0.65).contains(&l.minimum_b));
        assert!((0.07..=0.15).contains(&l.null_model));
    }
}
