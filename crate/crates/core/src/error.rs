use chrono::NaiveDate;

/// Errors returned by this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A load value was zero or negative, so its logarithm is undefined.
    #[error("non-positive load value {value} at {location}")]
    NonPositiveValue { location: String, value: f64 },
    /// A half-hour period was missing between two consecutive rows.
    #[error("gap detected at row {row}: expected {expected}, found {found}")]
    GapDetected {
        row: usize,
        expected: String,
        found: String,
    },
    /// Rows were duplicated or out of order.
    #[error("non-monotonic timestamp at row {row}: {found} does not follow {previous}")]
    NonMonotonic {
        row: usize,
        previous: String,
        found: String,
    },
    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("year {0} outside supported range 1900..=2200")]
    YearOutOfRange(i32),
    #[error("insufficient history: {0}")]
    InsufficientHistory(String),
    /// The annual lag of a period points before any defined intrayear index.
    #[error("missing annual index: offset {offset} with lag {lag}")]
    MissingAnnualIndex { offset: usize, lag: usize },
    #[error("series too short: need more than {needed} observations, have {have}")]
    SeriesTooShort { needed: usize, have: usize },
    #[error("training diverged: {0}")]
    Divergence(String),
    #[error("empty mask: no observations in subset '{0}'")]
    EmptyMask(String),
    #[error("mismatched horizons: {0}")]
    MismatchedHorizons(String),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("date {0} not covered by the lag table")]
    DateNotCovered(NaiveDate),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
