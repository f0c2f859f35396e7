use std::path::PathBuf;

/// Every failure the solver can report.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument or configuration value is outside its admissible range.
    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },

    /// A caller broke an operation's precondition (wrong field shape, missing jets...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Grid or solver configuration that the numerics cannot handle.
    #[error("configuration error: {0}")]
    Configuration(String),

    /// Dense factorization failed even after raising the regularization.
    #[error("singular system: {0}")]
    Singular(String),

    /// Non-finite or runaway values during a time step.
    #[error("numerical blow-up at step {step} (t = {t}): {detail}")]
    BlowUp { step: usize, t: f64, detail: String },

    /// Snapshots or trajectories that cannot be compared.
    #[error("comparison error: {0}")]
    Comparison(String),

    /// Malformed binary or text file.
    #[error("format error in {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation { .. } | Error::Contract(_) | Error::Configuration(_) => 2,
            Error::Comparison(_) => 2,
            Error::Singular(_) | Error::BlowUp { .. } => 3,
            Error::Format { .. } | Error::Io { .. } => 4,
        }
    }
}
