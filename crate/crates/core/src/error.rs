use thiserror::Error;

/// Errors produced by the leakage toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("probability {0} outside the open interval (0, 1)")]
    ProbabilityOutOfRange(f64),

    #[error("empty posterior ensemble")]
    EmptyEnsemble,

    #[error("mixture components mix continuous and discrete kinds")]
    MixedKinds,

    #[error("distribution kind mismatch: {0}")]
    KindMismatch(String),

    #[error("csv: {0}")]
    Csv(String),

    #[error("missing header row")]
    MissingHeader,

    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("row {row}: missing value in column '{column}'")]
    MissingValue { row: usize, column: String },

    #[error("row {row}: non-finite value in column '{column}'")]
    NonFiniteValue { row: usize, column: String },

    #[error("unknown column '{0}'")]
    UnknownColumn(String),

    #[error("column '{0}' is categorical and cannot be used as the response")]
    CategoricalResponse(String),

    #[error("covariate '{0}' listed more than once")]
    DuplicateCovariate(String),

    #[error("design matrix is rank deficient (column '{column}' is linearly dependent)")]
    RankDeficient { column: String },

    #[error("posterior improper under flat prior: n = {n} rows but p = {p} columns")]
    ImproperPosterior { n: usize, p: usize },

    #[error("degenerate predictive: residual variance is zero")]
    DegeneratePredictive,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("covariate point: {0}")]
    Encoding(String),

    #[error("grid point {index}: {source}")]
    GridPoint { index: usize, source: Box<Error> },

    #[error("invalid evidence: {0}")]
    InvalidEvidence(String),

    #[error("interval-event mode requires an observation resolution")]
    MissingResolution,

    #[error("no observations supplied")]
    NoObservations,

    #[error("enumerate only finite supports: {0}")]
    InfiniteSupport(String),

    #[error("CRPS undefined: infinite mean")]
    CrpsUndefined,

    #[error("infeasible configuration: {0}")]
    Infeasible(String),

    #[error("no forecast cases supplied")]
    NoCases,
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Csv(err.to_string())
    }
}
