use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value outside its physical or mathematical domain.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("mode index {index} out of range for a {modes}-mode state")]
    ModeIndex { index: usize, modes: usize },

    /// A conditional outcome with zero probability (the filter or projection
    /// annihilates the state).
    #[error("degenerate outcome: {0}")]
    Degenerate(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    /// The counting estimator has an empty denominator.
    #[error("estimation failure: {0}")]
    Estimation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// True for errors caused by bad inputs rather than by the computation.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Parameter(_) | Error::ModeIndex { .. } | Error::Parse(_))
    }
}

/// Checks that `x` is finite and lies in `[lo, hi]`.
pub(crate) fn check_range(name: &str, x: f64, lo: f64, hi: f64) -> Result<f64> {
    if x.is_finite() && x >= lo && x <= hi {
        Ok(x)
    } else {
        Err(Error::Parameter(format!("{name} = {x} outside [{lo}, {hi}]")))
    }
}
