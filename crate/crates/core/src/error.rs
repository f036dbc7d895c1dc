use thiserror::Error;

use crate::integrate::DiagnosticsRecord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid must have an even number of modes per axis >= 8, got {0}")]
    InvalidGrid(usize),

    #[error("grid mismatch: {left} vs {right} modes per axis")]
    GridMismatch { left: usize, right: usize },

    #[error("invalid parameter `{name}`: must be {constraint} (got {value})")]
    InvalidParameter {
        name: &'static str,
        constraint: &'static str,
        value: f64,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("field is not solenoidal: max |k . u_k| = {max_divergence:e} exceeds {tolerance:e}")]
    NotSolenoidal { max_divergence: f64, tolerance: f64 },

    #[error("blow-up detected at t = {t}")]
    BlowUp {
        t: f64,
        last: Box<Option<DiagnosticsRecord>>,
    },

    #[error("need at least 2 usable rows for a log-log fit, got {0}")]
    TooFewRows(usize),

    #[error("{0}")]
    InvalidStudy(String),

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn is_blow_up(&self) -> bool {
        matches!(self, Error::BlowUp { .. })
    }
}

pub(crate) fn check_non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            constraint: ">= 0",
            value,
        })
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            constraint: "> 0",
            value,
        })
    }
}
