use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::dataset::{ColumnData, Dataset};
use super::linalg::Matrix;
use crate::error::{Error, Result};

/// Which columns of a dataset form the response and the covariates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub response: String,
    /// Empty for the null-x (intercept-only) model.
    pub covariates: Vec<String>,
    pub intercept: bool,
}

impl ModelSpec {
    pub fn new<S: Into<String>>(response: impl Into<String>, covariates: impl IntoIterator<Item = S>) -> Self {
        Self {
            response: response.into(),
            covariates: covariates.into_iter().map(Into::into).collect(),
            intercept: true,
        }
    }

    /// Intercept-only model.
    pub fn null(response: impl Into<String>) -> Self {
        Self::new(response, Vec::<String>::new())
    }

    pub fn without_intercept(mut self) -> Self {
        self.intercept = false;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CovariateCoding {
    Numeric {
        name: String,
    },
    /// Indicator columns for every level except `baseline`.
    Categorical {
        name: String,
        levels: Vec<String>,
        baseline: String,
    },
}

impl CovariateCoding {
    pub fn name(&self) -> &str {
        match self {
            CovariateCoding::Numeric { name } | CovariateCoding::Categorical { name, .. } => name,
        }
    }
}

/// How covariate values map onto design-matrix columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColumnCoding {
    pub intercept: bool,
    pub covariates: Vec<CovariateCoding>,
}

impl ColumnCoding {
    /// Plain numeric columns `x1..xp` with no intercept, for fits made
    /// directly from a matrix.
    pub fn raw(p: usize) -> Self {
        Self {
            intercept: false,
            covariates: (1..=p).map(|i| CovariateCoding::Numeric { name: format!("x{i}") }).collect(),
        }
    }

    pub fn column_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        if self.intercept {
            names.push("(intercept)".to_owned());
        }
        for c in &self.covariates {
            match c {
                CovariateCoding::Numeric { name } => names.push(name.clone()),
                CovariateCoding::Categorical { name, levels, baseline } => names.extend(
                    levels
                        .iter()
                        .filter(|l| *l != baseline)
                        .map(|l| format!("{name}={l}")),
                ),
            }
        }
        names
    }

    pub fn width(&self) -> usize {
        self.column_names().len()
    }

    /// Categorical covariates with their levels.
    pub fn categorical(&self) -> Vec<(&str, &[String])> {
        self.covariates
            .iter()
            .filter_map(|c| match c {
                CovariateCoding::Categorical { name, levels, .. } => Some((name.as_str(), levels.as_slice())),
                CovariateCoding::Numeric { .. } => None,
            })
            .collect()
    }

    /// Design row for a covariate point.
    pub fn encode(&self, point: &CovariatePoint) -> Result<Vec<f64>> {
        let mut row = Vec::with_capacity(self.width());
        if self.intercept {
            row.push(1.0);
        }
        for c in &self.covariates {
            let value = point
                .get(c.name())
                .ok_or_else(|| Error::Encoding(format!("no value for covariate '{}'", c.name())))?;
            match c {
                CovariateCoding::Numeric { name } => match value {
                    CovariateValue::Number(v) if v.is_finite() => row.push(*v),
                    CovariateValue::Number(v) => {
                        return Err(Error::Encoding(format!("covariate '{name}' value {v} is not finite")))
                    }
                    CovariateValue::Level(l) => {
                        return Err(Error::Encoding(format!("covariate '{name}' is numeric, got level '{l}'")))
                    }
                },
                CovariateCoding::Categorical { name, levels, baseline } => {
                    let level = match value {
                        CovariateValue::Level(l) => l.clone(),
                        CovariateValue::Number(v) => v.to_string(),
                    };
                    if !levels.contains(&level) {
                        return Err(Error::Encoding(format!("covariate '{name}' has no level '{level}'")));
                    }
                    row.extend(
                        levels
                            .iter()
                            .filter(|l| *l != baseline)
                            .map(|l| if *l == level { 1.0 } else { 0.0 }),
                    );
                }
            }
        }
        Ok(row)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CovariateValue {
    Number(f64),
    Level(String),
}

impl From<f64> for CovariateValue {
    fn from(v: f64) -> Self {
        CovariateValue::Number(v)
    }
}

impl From<&str> for CovariateValue {
    fn from(v: &str) -> Self {
        CovariateValue::Level(v.to_owned())
    }
}

impl From<String> for CovariateValue {
    fn from(v: String) -> Self {
        CovariateValue::Level(v)
    }
}

/// Named covariate values at which to evaluate a predictive.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CovariatePoint(BTreeMap<String, CovariateValue>);

impl CovariatePoint {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: impl Into<String>, value: impl Into<CovariateValue>) -> Self {
        self.insert(name, value);
        self
    }

    pub fn insert(&mut self, name: impl Into<String>, value: impl Into<CovariateValue>) {
        self.0.insert(name.into(), value.into());
    }

    pub fn get(&self, name: &str) -> Option<&CovariateValue> {
        self.0.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &CovariateValue)> {
        self.0.iter()
    }

    /// Compact `name=value;…` label.
    pub fn label(&self) -> String {
        self.0
            .iter()
            .map(|(k, v)| match v {
                CovariateValue::Number(x) => format!("{k}={x}"),
                CovariateValue::Level(l) => format!("{k}={l}"),
            })
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// Design matrix, response vector and the coding that produced them.
#[derive(Debug, Clone)]
pub struct Design {
    pub x: Matrix,
    pub y: Vec<f64>,
    pub coding: ColumnCoding,
}

/// Builds `X` (intercept first, then covariates in declared order, with
/// categorical covariates expanded to indicators omitting the
/// lexicographically smallest level) and `y`.
pub fn build_design(data: &Dataset, spec: &ModelSpec) -> Result<Design> {
    let response = data.column(&spec.response)?;
    let y = match &response.data {
        ColumnData::Numeric(v) => v.clone(),
        ColumnData::Categorical(_) => return Err(Error::CategoricalResponse(spec.response.clone())),
    };
    for (i, name) in spec.covariates.iter().enumerate() {
        if spec.covariates[..i].contains(name) {
            return Err(Error::DuplicateCovariate(name.clone()));
        }
    }

    let mut coding = ColumnCoding {
        intercept: spec.intercept,
        covariates: Vec::with_capacity(spec.covariates.len()),
    };
    for name in &spec.covariates {
        let col = data.column(name)?;
        coding.covariates.push(match col.levels() {
            None => CovariateCoding::Numeric { name: name.clone() },
            Some(levels) => CovariateCoding::Categorical {
                name: name.clone(),
                baseline: levels[0].clone(),
                levels,
            },
        });
    }

    let n = data.n_rows();
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut point = CovariatePoint::new();
        for name in &spec.covariates {
            match &data.column(name)?.data {
                ColumnData::Numeric(v) => point.insert(name.clone(), v[i]),
                ColumnData::Categorical(v) => point.insert(name.clone(), v[i].clone()),
            }
        }
        rows.push(coding.encode(&point)?);
    }
    let x = if rows.is_empty() {
        Matrix::zeros(0, coding.width())
    } else {
        Matrix::from_rows(&rows)
    };
    Ok(Design { x, y, coding })
}
