use loadrule_core::Error as CoreError;

/// Failure of a command, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("model error: {0}")]
    Model(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Data(_) => 3,
            Self::Model(_) => 4,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        match e {
            CoreError::ConfigInvalid(_) | CoreError::MismatchedHorizons(_) => Self::Config(msg),
            CoreError::NonPositiveValue { .. }
            | CoreError::GapDetected { .. }
            | CoreError::NonMonotonic { .. }
            | CoreError::Parse { .. }
            | CoreError::YearOutOfRange(_)
            | CoreError::Io(_)
            | CoreError::Csv(_)
            | CoreError::DateNotCovered(_) => Self::Data(msg),
            CoreError::InsufficientHistory(_)
            | CoreError::MissingAnnualIndex { .. }
            | CoreError::SeriesTooShort { .. }
            | CoreError::Divergence(_)
            | CoreError::EmptyMask(_)
            | CoreError::Json(_) => Self::Model(msg),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Wraps an I/O failure on `path` as a data error.
pub fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Data(format!("{}: {e}", path.display()))
}
