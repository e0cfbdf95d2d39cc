use thiserror::Error;

use crate::dist::VariableId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid joint table: {0}")]
    InvalidJoint(String),

    #[error("joint table would have {cells} cells, above the limit of {limit}")]
    TooLarge { cells: u128, limit: usize },

    #[error("variable {0} is not part of this table")]
    UnknownVariable(VariableId),

    #[error("variable sets overlap on {0}")]
    Overlap(VariableId),

    #[error("empty variable set where a nonempty one is required ({0})")]
    EmptySet(&'static str),

    #[error("conditioning on {var}={value} which has zero probability")]
    ZeroProbability { var: VariableId, value: usize },

    #[error("value {value} out of range for {var} (alphabet size {size})")]
    ValueOutOfRange {
        var: VariableId,
        value: usize,
        size: usize,
    },

    #[error("not a Markov chain: residual {residual:e} nats exceeds {tol:e}")]
    NotMarkov { residual: f64, tol: f64 },

    #[error("index out of range: {0}")]
    Range(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
