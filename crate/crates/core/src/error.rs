use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Request beyond the range covered by a truncation parameter.
    #[error("range error: {0}")]
    Range(String),

    /// An iterative or adaptive procedure failed to reach its tolerance.
    #[error("precision error: {0}")]
    Precision(String),

    /// Divergent quantity (e.g. an integral that is infinite for the given exponent).
    #[error("divergence: {0}")]
    Divergence(String),

    #[error("gauge error: {0}")]
    Gauge(String),

    /// Violated pre-condition between cooperating inputs.
    #[error("contract error: {0}")]
    Contract(String),

    #[error("fit rejected: {0}")]
    FitRejected(String),

    #[error("particle crossing at t={time:.6e} between particles {index} and {next}", next = .index + 1)]
    Crossing { time: f64, index: usize },

    #[error("non-finite state produced at t={time:.6e}")]
    Overflow { time: f64 },

    #[error("violated constraint `{constraint}`: {detail}")]
    Constraint { constraint: String, detail: String },

    #[error("config line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn constraint(constraint: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Constraint {
            constraint: constraint.into(),
            detail: detail.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Tags an error with the pipeline stage it came from.
    pub fn at(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.at(stage))
    }
}
