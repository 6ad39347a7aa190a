use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },

    #[error("request {request}: destination {dst} unreachable from source {src}")]
    Unreachable { request: i64, src: usize, dst: usize },

    #[error("unknown topology `{0}`")]
    UnknownTopology(String),

    #[error("fidelity domain error: {0}")]
    Domain(String),

    #[error("request {request}: no path meets the fidelity demands (blocked edges: {blocked})")]
    NoFeasiblePath { request: i64, blocked: String },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("solution does not match instance: {0}")]
    DimensionMismatch(String),

    #[error("instance exceeds oracle limits: {0}")]
    OracleLimits(String),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
