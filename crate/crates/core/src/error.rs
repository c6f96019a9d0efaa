use thiserror::Error;

/// Errors raised anywhere in the toolkit.
///
/// Variants group into three families that the command-line front end maps
/// onto exit codes: configuration, data and numeric failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("cell error at row {row}, column {column:?}: {message}")]
    Cell {
        row: usize,
        column: String,
        message: String,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("model has no components and no predictors")]
    EmptyModel,

    #[error("non-finite value at time index {index}: {message}")]
    NonFinite { index: usize, message: String },

    #[error("ill-conditioned system for subset {subset:?}: {message}")]
    Conditioning { subset: Vec<usize>, message: String },

    #[error("AR coefficients failed the stationarity check after {tries} proposals")]
    Stationarity { tries: usize },

    #[error("sampler diverged at iteration {iteration}: {message}")]
    Divergence { iteration: usize, message: String },
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Io { .. }
            | Error::Schema(_)
            | Error::Cell { .. }
            | Error::Domain(_)
            | Error::Alignment(_)
            | Error::InsufficientData(_)
            | Error::Dimension(_)
            | Error::EmptyModel => 3,
            Error::NonFinite { .. }
            | Error::Conditioning { .. }
            | Error::Stationarity { .. }
            | Error::Divergence { .. } => 4,
        }
    }

    /// Short machine-readable tag for the error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
            Error::Schema(_) => "schema",
            Error::Cell { .. } => "cell",
            Error::Domain(_) => "domain",
            Error::Alignment(_) => "alignment",
            Error::InsufficientData(_) => "insufficient_data",
            Error::Dimension(_) => "dimension",
            Error::EmptyModel => "empty_model",
            Error::NonFinite { .. } => "non_finite",
            Error::Conditioning { .. } => "conditioning",
            Error::Stationarity { .. } => "stationarity",
            Error::Divergence { .. } => "divergence",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
