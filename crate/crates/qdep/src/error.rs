//! Error type shared across the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the library and the CLI layer.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A model parameter lies outside its admissible range.
    #[error("parameter out of range: {0}")]
    Parameter(String),

    /// An evaluation point lies outside the domain of the operation
    /// (e.g. the weight `w` diverges on the boundary of the unit square).
    #[error("domain error: {0}")]
    Domain(String),

    /// Tied observations encountered under the `strict` tie policy.
    #[error("ties in the data under the strict tie policy: {0}")]
    Ties(String),

    /// A file could not be parsed; `line` is 1-based.
    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    /// An invalid model specification string such as `frechet-mixture:2.0`.
    #[error("invalid model spec `{spec}`: {message}")]
    ModelSpec { spec: String, message: String },

    /// Invalid or conflicting run configuration (CLI flags).
    #[error("config error: {0}")]
    Config(String),

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for configuration errors,
    /// 3 for input (data) errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_) | Error::Domain(_) | Error::ModelSpec { .. } | Error::Config(_) => {
                2
            }
            Error::Ties(_) | Error::Parse { .. } | Error::Io(_) => 3,
        }
    }
}
