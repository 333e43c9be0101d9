use thiserror::Error;

/// Errors raised across the estimation stack.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside its admissible region.
    #[error("domain error: {0}")]
    Domain(String),

    /// The survey design cannot identify the model (e.g. p = 0.5).
    #[error("design error: {0}")]
    Design(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A closed-form estimator hit a zero denominator.
    #[error("degenerate denominator in {0}")]
    DegenerateDenominator(&'static str),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("singular weight system: t0 and t50 are both {0}")]
    SingularSystem(f64),

    #[error("anchor weight {0} has an infinite logit")]
    InfiniteLogit(f64),

    /// A single input record is invalid; `index` is zero-based.
    #[error("record {index}: {message}")]
    Validation { index: usize, message: String },

    #[error("{failed} of {total} bootstrap resamples failed (limit is 10%)")]
    Unreliable { failed: usize, total: usize },

    /// A mandatory survey column is absent from the header.
    #[error("missing required column `{0}`")]
    MissingColumn(String),

    /// Malformed survey file content; `line` is 1-based and counts the header.
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
