use thiserror::Error;

/// Errors surfaced by the estimators, simulators and experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    /// NaN has no position in the ordered partition.
    #[error("cannot quantize NaN")]
    NanInput,
    #[error("value {value} is not a symbol of the alphabet of size {size}")]
    NotInAlphabet { value: f64, size: u32 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// The window is too short for even one recurrence (kappa = 0).
    #[error("insufficient data: no recurrence of the current pattern within the window")]
    InsufficientData,
    #[error("process `{0}` has no analytic conditional-law oracle")]
    OracleUnavailable(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}
