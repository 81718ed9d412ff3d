use thiserror::Error;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad input or a precondition the caller can fix.
    Config,
    /// A mathematical hypothesis of a cited result does not hold.
    Hypothesis,
    /// An iterative method failed or an internal cross-check disagreed.
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Precondition(String),

    #[error("enumeration needs {needed} lattice points but the memory budget is {budget}")]
    Budget { needed: u64, budget: u64 },

    #[error("cutoff {cutoff} is too small: positive real parts may be truncated, need cutoff > {required}")]
    CutoffTooSmall { cutoff: f64, required: f64 },

    #[error("point ({x}, {y}) is not a fixed point: |f(p)| = {residual:e}")]
    NotAFixedPoint { x: f64, y: f64, residual: f64 },

    #[error("hypothesis not met: {0}")]
    HypothesisNotMet(String),

    #[error("sign condition v.f(v) <= 0 violated at ({x}, {y}): v.f(v) = {value:e}")]
    SignViolation { x: f64, y: f64, value: f64 },

    #[error("no sign change of phi(a) - 2 on [{lo}, {hi}] (values {f_lo}, {f_hi})")]
    Bracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("spectral window ({lo}, {hi}] contains no eigenmodes")]
    EmptyWindow { lo: f64, hi: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Precondition(_)
            | Error::Budget { .. }
            | Error::CutoffTooSmall { .. }
            | Error::EmptyWindow { .. }
            | Error::Io(_)
            | Error::Csv(_)
            | Error::Json(_) => ErrorClass::Config,
            Error::NotAFixedPoint { .. } | Error::HypothesisNotMet(_) | Error::SignViolation { .. } => {
                ErrorClass::Hypothesis
            }
            Error::Bracket { .. } | Error::Numerical(_) | Error::Consistency(_) => ErrorClass::Numerical,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}
