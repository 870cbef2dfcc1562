//! Normal linear regression under flat (improper) priors.
//!
//! With `p(β, σ²) ∝ 1/σ²` the posterior is summarized exactly by the OLS
//! statistics `β̂`, `s² = SSE/(n − p)` and `(XᵀX)⁻¹`, and the posterior
//! predictive at a covariate row `x*` is Student-t with `n − p` degrees of
//! freedom, location `x*ᵀβ̂` and scale `√(s²(1 + x*ᵀ(XᵀX)⁻¹x*))`.

mod dataset;
mod design;
mod linalg;

pub use dataset::{Column, ColumnData, Dataset};
pub use design::{build_design, ColumnCoding, CovariateCoding, CovariatePoint, CovariateValue, Design, ModelSpec};
pub use linalg::{Matrix, PivotedQr};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::predictive::PredictiveDistribution;

/// Parses a CSV source into a typed [`Dataset`].
pub fn load_dataset<R: std::io::Read>(csv_source: R) -> Result<Dataset> {
    Dataset::from_csv_reader(csv_source)
}

/// Sufficient statistics of the flat-prior posterior.
#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub beta_hat: Vec<f64>,
    pub s2: f64,
    pub xtx_inverse: Matrix,
    pub n: usize,
    pub p: usize,
    pub column_names: Vec<String>,
    pub column_coding: ColumnCoding,
}

/// OLS by Householder QR with column pivoting.
///
/// A column is declared dependent when its pivoted `|R_kk|` falls to
/// `ε · max(n, p) · |R_00|` or below.
pub fn fit(x: &Matrix, y: &[f64]) -> Result<FitResult> {
    fit_coded(x, y, ColumnCoding::raw(x.cols()))
}

impl Design {
    pub fn fit(&self) -> Result<FitResult> {
        fit_coded(&self.x, &self.y, self.coding.clone())
    }
}

/// Builds the design for `spec` and fits it.
pub fn fit_dataset(data: &Dataset, spec: &ModelSpec) -> Result<FitResult> {
    build_design(data, spec)?.fit()
}

fn fit_coded(x: &Matrix, y: &[f64], coding: ColumnCoding) -> Result<FitResult> {
    let (n, p) = (x.rows(), x.cols());
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: y.len(),
        });
    }
    if coding.width() != p {
        return Err(Error::DimensionMismatch {
            expected: coding.width(),
            found: p,
        });
    }
    if n <= p {
        return Err(Error::ImproperPosterior { n, p });
    }
    let names = coding.column_names();

    let qr = PivotedQr::new(x);
    let diag = qr.r_diag();
    let tol = f64::EPSILON * n.max(p) as f64 * diag[0].abs();
    if let Some(k) = diag.iter().position(|d| !(d.abs() > tol)) {
        return Err(Error::RankDeficient {
            column: names[qr.perm()[k]].clone(),
        });
    }

    let mut qty = y.to_vec();
    qr.apply_qt(&mut qty);
    let z = qr.solve_r(&qty[..p]);
    let mut beta_hat = vec![0.0; p];
    for (k, &j) in qr.perm().iter().enumerate() {
        beta_hat[j] = z[k];
    }

    let fitted = x.mul_vec(&beta_hat);
    let sse: f64 = y.iter().zip(&fitted).map(|(a, b)| (a - b) * (a - b)).sum();
    let s2 = sse / (n - p) as f64;

    // (XᵀX)⁻¹ = P R⁻¹ R⁻ᵀ Pᵀ
    let r_inv = qr.r_inverse();
    let mut xtx_inverse = Matrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            let v: f64 = (0..p).map(|k| r_inv.get(i, k) * r_inv.get(j, k)).sum();
            xtx_inverse.set(qr.perm()[i], qr.perm()[j], v);
        }
    }

    Ok(FitResult {
        beta_hat,
        s2,
        xtx_inverse,
        n,
        p,
        column_names: names,
        column_coding: coding,
    })
}

impl FitResult {
    pub fn df(&self) -> f64 {
        (self.n - self.p) as f64
    }

    fn check_row(&self, x_star: &[f64]) -> Result<()> {
        if x_star.len() != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                found: x_star.len(),
            });
        }
        Ok(())
    }

    /// Leverage `h = x*ᵀ(XᵀX)⁻¹x*`.
    pub fn leverage(&self, x_star: &[f64]) -> Result<f64> {
        self.check_row(x_star)?;
        Ok(self.xtx_inverse.quad_form(x_star).max(0.0))
    }

    pub fn location_at(&self, x_star: &[f64]) -> Result<f64> {
        self.check_row(x_star)?;
        Ok(linalg::dot(x_star, &self.beta_hat))
    }

    /// Student-t posterior predictive at an encoded design row.
    pub fn predictive_at(&self, x_star: &[f64]) -> Result<PredictiveDistribution> {
        let location = self.location_at(x_star)?;
        let h = self.leverage(x_star)?;
        if !(self.s2 > 0.0) {
            return Err(Error::DegeneratePredictive);
        }
        PredictiveDistribution::student_t(self.df(), location, (self.s2 * (1.0 + h)).sqrt())
    }

    /// Posterior predictive at a named covariate point.
    pub fn predictive_at_point(&self, point: &CovariatePoint) -> Result<PredictiveDistribution> {
        self.predictive_at(&self.column_coding.encode(point)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceStat {
    Median,
    Minimum,
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Covariate points with every numeric covariate at its training median
/// (or minimum), one point per combination of categorical levels.
pub fn reference_points(data: &Dataset, spec: &ModelSpec, stat: ReferenceStat) -> Result<Vec<CovariatePoint>> {
    let mut points = vec![CovariatePoint::new()];
    for name in &spec.covariates {
        let col = data.column(name)?;
        match &col.data {
            ColumnData::Numeric(values) => {
                if values.is_empty() {
                    return Err(Error::InvalidParameter(format!("column '{name}' is empty")));
                }
                let v = match stat {
                    ReferenceStat::Median => median(values),
                    ReferenceStat::Minimum => values.iter().copied().fold(f64::INFINITY, f64::min),
                };
                for p in &mut points {
                    p.insert(name.clone(), v);
                }
            }
            ColumnData::Categorical(_) => {
                let levels = col.levels().unwrap_or_default();
                points = points
                    .into_iter()
                    .flat_map(|p| levels.iter().map(move |l| p.clone().with(name.clone(), l.clone())))
                    .collect();
            }
        }
    }
    Ok(points)
}
