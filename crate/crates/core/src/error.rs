use thiserror::Error;

use crate::panel::Month;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the toolkit.
///
/// Variants split into two families: data errors (bad or insufficient input)
/// and numerical errors (the input is well-formed but the computation is
/// degenerate). [`Error::is_numerical`] tells them apart.
#[derive(Debug, Error)]
pub enum Error {
    #[error("no records")]
    NoRecords,

    #[error("invalid record: {0}")]
    InvalidRecord(String),

    #[error("missing yield curve point for {month} at maturity {maturity} months")]
    MissingCurvePoint { month: Month, maturity: u32 },

    #[error("column `{column}` has fewer than {needed} usable values")]
    TooFewValues { column: String, needed: usize },

    #[error("dates must be strictly increasing: {0}")]
    NonMonotone(String),

    #[error("intersect alignment has no overlapping complete months")]
    EmptyOverlap,

    #[error("column `{0}` has missing values; complete data required")]
    MissingValues(String),

    #[error("duplicate series name `{0}`")]
    DuplicateSeries(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("insufficient observations: {0}")]
    InsufficientObservations(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("degenerate series: {0}")]
    DegenerateSeries(String),

    #[error("rank-deficient design (reciprocal condition number {rcond:.3e}); collinear columns: {}", columns.join(", "))]
    RankDeficient { columns: Vec<String>, rcond: f64 },

    #[error("singular covariance in {0} set; retry with a small ridge (e.g. 1e-8)")]
    SingularCovariance(&'static str),

    #[error("degenerate correlation: canonical correlation {index} equals 1")]
    DegenerateCorrelation { index: usize },

    #[error("degenerate residuals: residual matrix is identically zero")]
    DegenerateResiduals,

    #[error("invalid factor model spec: {0}")]
    InvalidSpec(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerical kind (degenerate or singular
    /// problems) as opposed to malformed or insufficient data.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateSeries(_)
                | Error::RankDeficient { .. }
                | Error::SingularCovariance(_)
                | Error::DegenerateCorrelation { .. }
                | Error::DegenerateResiduals
        )
    }
}
