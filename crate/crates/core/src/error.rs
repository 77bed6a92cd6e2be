use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Cholesky factorization of a precision or covariance matrix failed.
    #[error("matrix is not positive definite in the {update} update")]
    Factorization { update: &'static str },

    #[error("non-finite chain state detected at iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("{} shard(s) failed; first failure in shard {}: {}", .failures.len(), .failures[0].0, .failures[0].1)]
    ShardsFailed { failures: Vec<(usize, Error)> },

    #[error("method {method} requires retained draws, but {what} has none")]
    RequiresDraws { method: &'static str, what: String },

    #[error("zero posterior variance for parameter {parameter} in shard {shard}")]
    DegenerateVariance { parameter: String, shard: usize },

    #[error("orthant probabilities are only supported for dimension <= 3, got {0}")]
    UnsupportedDimension(usize),

    #[error("malformed interval: {0}")]
    MalformedInterval(String),

    #[error("matrix is not symmetric: {0}")]
    NotSymmetric(String),

    #[error("unknown predictor {0:?}")]
    UnknownPredictor(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("parse error at row {row}, column {column:?}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("format error in {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("unsupported format version {found:?} (expected major {expected})")]
    VersionMismatch { found: String, expected: u32 },

    #[error("truncated file {0}")]
    Truncated(PathBuf),

    #[error("digest mismatch for {what}: recorded {recorded}, computed {computed}")]
    DigestMismatch {
        what: String,
        recorded: String,
        computed: String,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable identifier for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::Configuration(_) => "configuration",
            Error::DimensionMismatch(_) => "dimension-mismatch",
            Error::Factorization { .. } => "factorization-failure",
            Error::NonFinite { .. } => "non-finite-state",
            Error::ShardsFailed { .. } => "shard-failure",
            Error::RequiresDraws { .. } => "method-requires-draws",
            Error::DegenerateVariance { .. } => "degenerate-variance",
            Error::UnsupportedDimension(_) => "unsupported-dimension",
            Error::MalformedInterval(_) => "malformed-interval",
            Error::NotSymmetric(_) => "not-symmetric",
            Error::UnknownPredictor(_) => "unknown-predictor",
            Error::EmptyInput(_) => "empty-input",
            Error::Parse { .. } => "parse",
            Error::Format { .. } => "format",
            Error::VersionMismatch { .. } => "version-mismatch",
            Error::Truncated(_) => "truncated-file",
            Error::DigestMismatch { .. } => "digest-mismatch",
            Error::Context { source, .. } => source.kind(),
            Error::Io(_) => "io",
        }
    }

    pub fn context(self, context: impl Into<String>) -> Error {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, with any context wrappers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }
}
