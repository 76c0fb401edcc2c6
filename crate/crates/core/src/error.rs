use thiserror::Error;

use crate::expr::{EvalError, ParseError};

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),

    #[error("invalid signature: {0}")]
    Signature(String),

    #[error("invalid model: {0}")]
    Model(String),

    #[error("evaluation failed for `{var}`: {source}")]
    Eval {
        var: String,
        #[source]
        source: EvalError,
    },

    #[error("equation for `{var}` produced {value}, which is outside its domain")]
    OutOfDomain { var: String, value: i64 },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("{what} has {size} elements, above the configured cap of {cap}")]
    SizeCap { what: String, size: u128, cap: u128 },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}
