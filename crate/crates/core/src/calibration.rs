//! Calibration diagnostics for a sequence of forecasts `(P_i, y_i)`:
//! probability calibration through the PIT, exceedance and marginal
//! calibration against the pooled empirical distribution of the `y_i`,
//! CRPS scoring, and the Kullback–Leibler distance from an elicited
//! density.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::falsification::{is_falsified, FalsificationVerdict, Mode, Observation};
use crate::predictive::{seeded_rng, EmpiricalDistribution, Kind, PredictiveDistribution, DEFAULT_SEED};
use crate::quadrature::{integrate_finite, integrate_with_breaks};

/// Absolute tolerance for the CRPS and KL integrals.
pub const INTEGRAL_TOL: f64 = 1e-10;

/// Number of pooled-quantile points in the default marginal grid.
pub const DEFAULT_GRID_POINTS: usize = 101;

/// One forecast and what actually happened.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForecastCase {
    pub predictive: PredictiveDistribution,
    pub observed: f64,
}

impl ForecastCase {
    pub fn new(predictive: PredictiveDistribution, observed: f64) -> Result<Self> {
        if !observed.is_finite() {
            return Err(Error::InvalidParameter(format!("observed value {observed} is not finite")));
        }
        Ok(Self { predictive, observed })
    }
}

fn pooled(cases: &[ForecastCase]) -> Result<EmpiricalDistribution> {
    if cases.is_empty() {
        return Err(Error::NoCases);
    }
    EmpiricalDistribution::new(cases.iter().map(|c| c.observed).collect())
}

/// Probability integral transforms `P_i(y_i)`. Discrete predictives get the
/// randomized version `P_i(y_i⁻) + V_i·pmf_i(y_i)` with `V_i` uniform from
/// the seeded generator.
pub fn pit(cases: &[ForecastCase], seed: u64) -> Result<Vec<f64>> {
    if cases.is_empty() {
        return Err(Error::NoCases);
    }
    let mut rng = seeded_rng(seed);
    Ok(cases
        .iter()
        .map(|c| {
            let d = &c.predictive;
            match d.kind() {
                Kind::Continuous => d.cdf(c.observed),
                Kind::Discrete => {
                    let left = d.cdf_left(c.observed);
                    let mass = (d.cdf(c.observed) - left).max(0.0);
                    let v: f64 = rng.random();
                    (left + v * mass).clamp(0.0, 1.0)
                }
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbabilityPoint {
    pub level: f64,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbabilityCurve {
    pub points: Vec<ProbabilityPoint>,
    pub max_deviation: f64,
}

/// Levels `0.01, 0.02, …, 0.99`.
pub fn default_levels() -> Vec<f64> {
    (1..100).map(|k| k as f64 / 100.0).collect()
}

/// Empirical frequency of `PIT ≤ p` at each level, and the largest
/// `|frequency − p|`.
pub fn probability_calibration(pits: &[f64], levels: &[f64]) -> Result<ProbabilityCurve> {
    if pits.is_empty() {
        return Err(Error::NoCases);
    }
    if let Some(&p) = levels.iter().find(|&&p| !(p > 0.0 && p < 1.0)) {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    let mut sorted = pits.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mut levels = levels.to_vec();
    levels.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    let points: Vec<ProbabilityPoint> = levels
        .iter()
        .map(|&level| ProbabilityPoint {
            level,
            frequency: sorted.partition_point(|&u| u <= level) as f64 / n,
        })
        .collect();
    let max_deviation = points
        .iter()
        .map(|pt| (pt.frequency - pt.level).abs())
        .fold(0.0, f64::max);
    Ok(ProbabilityCurve { points, max_deviation })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExceedancePoint {
    pub y: f64,
    /// Average over cases of `Q̄⁻¹(P_i(y))`.
    pub mean_quantile: f64,
}

/// For each `y`, the average pooled-empirical quantile at the forecast
/// levels `P_i(y)`. Calibrated forecasts give the identity.
pub fn exceedance_calibration(cases: &[ForecastCase], levels: &[f64]) -> Result<Vec<ExceedancePoint>> {
    let q = pooled(cases)?;
    let mut ys = levels.to_vec();
    ys.sort_by(|a, b| a.total_cmp(b));
    let n = cases.len() as f64;
    Ok(ys
        .into_iter()
        .map(|y| ExceedancePoint {
            y,
            mean_quantile: cases.iter().map(|c| q.quantile(c.predictive.cdf(y))).sum::<f64>() / n,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginalPoint {
    pub y: f64,
    pub mean_predictive_cdf: f64,
    pub empirical_cdf: f64,
}

/// Pooled-observation quantiles at `k/(points − 1)`, duplicates removed.
pub fn default_grid(cases: &[ForecastCase], points: usize) -> Result<Vec<f64>> {
    let q = pooled(cases)?;
    let m = points.max(2) - 1;
    let mut grid: Vec<f64> = (0..=m).map(|k| q.quantile(k as f64 / m as f64)).collect();
    grid.dedup();
    Ok(grid)
}

/// Mean predictive CDF against the pooled empirical CDF at each grid value.
pub fn marginal_calibration(cases: &[ForecastCase], y_grid: &[f64]) -> Result<Vec<MarginalPoint>> {
    let q = pooled(cases)?;
    if y_grid.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidParameter("marginal grid must be sorted".into()));
    }
    let n = cases.len() as f64;
    Ok(y_grid
        .iter()
        .map(|&y| MarginalPoint {
            y,
            mean_predictive_cdf: cases.iter().map(|c| c.predictive.cdf(y)).sum::<f64>() / n,
            empirical_cdf: q.cdf(y),
        })
        .collect())
}

/// Exact CRPS of a discrete predictive: the integrand is constant between
/// consecutive atoms.
fn crps_discrete(dist: &PredictiveDistribution, y: f64) -> f64 {
    let (lo, _) = dist.support();
    let hi = match dist {
        PredictiveDistribution::Poisson(p) => p.effective_upper(),
        PredictiveDistribution::Mixture(m) => m
            .components()
            .iter()
            .map(|c| match &c.dist {
                PredictiveDistribution::Poisson(p) => p.effective_upper(),
                other => other.support().1,
            })
            .fold(f64::NEG_INFINITY, f64::max),
        other => other.support().1,
    };
    let mut knots = dist.atoms_in(lo.min(y), hi.max(y));
    knots.push(y);
    knots.sort_by(|a, b| a.total_cmp(b));
    knots.dedup();
    // Left of the first knot F = 0 and t < y; right of the last knot F = 1
    // and t ≥ y. Both contribute nothing.
    knots
        .windows(2)
        .map(|w| {
            let f = dist.cdf(w[0]);
            let step = if w[0] >= y { 1.0 } else { 0.0 };
            (f - step).powi(2) * (w[1] - w[0])
        })
        .sum()
}

/// Continuous ranked probability score `∫ (P(t) − 1{t ≥ y})² dt`.
pub fn crps(dist: &PredictiveDistribution, y: f64) -> Result<f64> {
    if !y.is_finite() {
        return Err(Error::InvalidParameter(format!("observed value {y} is not finite")));
    }
    if dist.mean().is_none() {
        return Err(Error::CrpsUndefined);
    }
    if dist.kind() == Kind::Discrete {
        return Ok(crps_discrete(dist, y));
    }
    let mut breaks = vec![y];
    for p in [1e-3, 0.25, 0.5, 0.75, 1.0 - 1e-3] {
        breaks.push(dist.quantile(p)?);
    }
    let q = integrate_with_breaks(
        |t| {
            if t < y {
                dist.cdf(t).powi(2)
            } else {
                dist.sf(t).powi(2)
            }
        },
        f64::NEG_INFINITY,
        f64::INFINITY,
        &breaks,
        INTEGRAL_TOL,
    );
    Ok(q.value.max(0.0))
}

/// An elicited density: either an analytic family or a piecewise-linear
/// density through grid points (zero outside the grid).
#[derive(Debug, Clone, PartialEq)]
pub enum ElicitedDensity {
    Analytic(PredictiveDistribution),
    Grid { points: Vec<f64>, density: Vec<f64> },
}

/// Tolerance on the total mass of a grid density.
pub const ELICITED_MASS_TOL: f64 = 1e-6;

impl ElicitedDensity {
    pub fn grid(points: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        if points.len() != density.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                found: density.len(),
            });
        }
        if points.len() < 2 {
            return Err(Error::InvalidParameter("elicited grid needs at least two points".into()));
        }
        if points.iter().any(|x| !x.is_finite()) || points.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter("elicited grid must be finite and increasing".into()));
        }
        if density.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::InvalidParameter("elicited density must be finite and nonnegative".into()));
        }
        let mass: f64 = points
            .windows(2)
            .zip(density.windows(2))
            .map(|(x, d)| 0.5 * (d[0] + d[1]) * (x[1] - x[0]))
            .sum();
        if (mass - 1.0).abs() > ELICITED_MASS_TOL {
            return Err(Error::InvalidParameter(format!("elicited density integrates to {mass}, not 1")));
        }
        Ok(Self::Grid { points, density })
    }
}

/// `∫ q log(q/p)` over the region where the elicited `q` is positive;
/// `+∞` when `p` vanishes on part of that region.
pub fn kl_distance(elicited: &ElicitedDensity, dist: &PredictiveDistribution) -> Result<f64> {
    if dist.kind() != Kind::Continuous {
        return Err(Error::KindMismatch("KL distance needs a continuous predictive".into()));
    }
    let (p_lo, p_hi) = dist.support();
    let term = |lq: f64, t: f64| {
        let q = lq.exp();
        if q == 0.0 {
            0.0
        } else {
            q * (lq - dist.ln_density(t))
        }
    };
    let value = match elicited {
        ElicitedDensity::Analytic(q) => {
            if q.kind() != Kind::Continuous {
                return Err(Error::KindMismatch("elicited density must be continuous".into()));
            }
            let (q_lo, q_hi) = q.support();
            if q_lo < p_lo || q_hi > p_hi {
                return Ok(f64::INFINITY);
            }
            let mut breaks = Vec::new();
            for p in [1e-3, 0.25, 0.5, 0.75, 1.0 - 1e-3] {
                breaks.push(q.quantile(p)?);
            }
            integrate_with_breaks(|t| term(q.ln_density(t), t), q_lo, q_hi, &breaks, INTEGRAL_TOL).value
        }
        ElicitedDensity::Grid { points, density } => {
            let mut total = 0.0;
            for (x, d) in points.windows(2).zip(density.windows(2)) {
                if d[0] == 0.0 && d[1] == 0.0 {
                    continue;
                }
                if x[0] < p_lo || x[1] > p_hi {
                    return Ok(f64::INFINITY);
                }
                let (x0, x1, d0, d1) = (x[0], x[1], d[0], d[1]);
                let q_at = move |t: f64| d0 + (d1 - d0) * (t - x0) / (x1 - x0);
                total += integrate_finite(|t| term(q_at(t).ln(), t), x0, x1, INTEGRAL_TOL).value;
            }
            total
        }
    };
    if value.is_nan() {
        return Ok(f64::INFINITY);
    }
    Ok(value.max(0.0))
}

/// Everything the calibration audit reports for one case list.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub n: usize,
    pub seed: u64,
    pub pit_values: Vec<f64>,
    pub probability_curve: Vec<ProbabilityPoint>,
    pub exceedance_curve: Vec<ExceedancePoint>,
    pub marginal_curve: Vec<MarginalPoint>,
    pub max_probability_deviation: f64,
    pub max_marginal_gap: f64,
    /// `None` when some predictive has no finite mean.
    pub mean_crps: Option<f64>,
    /// Point-event verdict: each case's observation against its own
    /// predictive.
    pub falsification: FalsificationVerdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationOptions {
    pub seed: u64,
    pub probability_levels: Vec<f64>,
    /// Defaults to the marginal grid.
    pub exceedance_levels: Option<Vec<f64>>,
    /// Defaults to [`DEFAULT_GRID_POINTS`] pooled quantiles.
    pub marginal_grid: Option<Vec<f64>>,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            probability_levels: default_levels(),
            exceedance_levels: None,
            marginal_grid: None,
        }
    }
}

/// Mean CRPS over the cases, or `None` if any score is undefined.
pub fn mean_crps(cases: &[ForecastCase]) -> Result<Option<f64>> {
    if cases.is_empty() {
        return Err(Error::NoCases);
    }
    let mut total = 0.0;
    for c in cases {
        match crps(&c.predictive, c.observed) {
            Ok(s) => total += s,
            Err(Error::CrpsUndefined) => return Ok(None),
            Err(e) => return Err(e),
        }
    }
    Ok(Some(total / cases.len() as f64))
}

pub fn calibration_report(cases: &[ForecastCase], options: &CalibrationOptions) -> Result<CalibrationReport> {
    let pit_values = pit(cases, options.seed)?;
    let probability = probability_calibration(&pit_values, &options.probability_levels)?;
    let grid = match &options.marginal_grid {
        Some(g) => g.clone(),
        None => default_grid(cases, DEFAULT_GRID_POINTS)?,
    };
    let exceedance_levels = options.exceedance_levels.clone().unwrap_or_else(|| grid.clone());
    let marginal_curve = marginal_calibration(cases, &grid)?;
    let max_marginal_gap = marginal_curve
        .iter()
        .map(|m| (m.mean_predictive_cdf - m.empirical_cdf).abs())
        .fold(0.0, f64::max);

    let mut falsification = FalsificationVerdict {
        falsified: false,
        witness: None,
        mode: Mode::PointEvent,
    };
    for c in cases {
        let v = is_falsified(&c.predictive, &[Observation::new(c.observed)], Mode::PointEvent)?;
        if v.falsified {
            falsification = v;
            break;
        }
    }

    Ok(CalibrationReport {
        n: cases.len(),
        seed: options.seed,
        exceedance_curve: exceedance_calibration(cases, &exceedance_levels)?,
        max_probability_deviation: probability.max_deviation,
        probability_curve: probability.points,
        marginal_curve,
        max_marginal_gap,
        mean_crps: mean_crps(cases)?,
        pit_values,
        falsification,
    })
}

fn curve_csv<const K: usize>(header: [&str; K], rows: impl Iterator<Item = [f64; K]>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Csv(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Csv(e.to_string()))
}

impl CalibrationReport {
    /// Columns `abscissa,value`: level and PIT frequency.
    pub fn probability_csv(&self) -> Result<String> {
        curve_csv(
            ["abscissa", "value"],
            self.probability_curve.iter().map(|p| [p.level, p.frequency]),
        )
    }

    /// Columns `abscissa,value`: y and mean pooled quantile.
    pub fn exceedance_csv(&self) -> Result<String> {
        curve_csv(
            ["abscissa", "value"],
            self.exceedance_curve.iter().map(|p| [p.y, p.mean_quantile]),
        )
    }

    /// Columns `abscissa,value,value2`: y, mean predictive CDF and pooled
    /// empirical CDF.
    pub fn marginal_csv(&self) -> Result<String> {
        curve_csv(
            ["abscissa", "value", "value2"],
            self.marginal_curve
                .iter()
                .map(|p| [p.y, p.mean_predictive_cdf, p.empirical_cdf]),
        )
    }
}
