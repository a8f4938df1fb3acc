use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),

    #[error("coefficient c = {0} outside (0, 1/2)")]
    CoefficientOutOfRange(f64),

    #[error("no sign change on [{lo}, {hi}] (f = {f_lo:e}, {f_hi:e})")]
    NoBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("root finder did not converge: {0}")]
    NoConvergence(&'static str),

    #[error("calibration failed at horizon {horizon}: {reason}")]
    Calibration { horizon: f64, reason: String },

    #[error("calibration at horizon {horizon} violates T >= (alpha / (2 a0 c))^2 = {required}")]
    InvalidCalibration { horizon: f64, required: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("out of memory: {0}")]
    Resource(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
