use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Adaptive refinement ran out of budget before the error estimate
    /// dropped below the requested tolerance.
    #[error("quadrature did not converge: value {value:e}, error estimate {error:e} after {evaluations} evaluations")]
    NonConvergent {
        value: f64,
        error: f64,
        evaluations: usize,
    },

    #[error("Gram matrix ill-conditioned at degree {degree}: condition estimate {condition:e}")]
    IllConditioned { degree: usize, condition: f64 },

    #[error("cross-check mismatch in {quantity}: {first:e} vs {second:e}")]
    CrossCheckMismatch {
        quantity: &'static str,
        first: f64,
        second: f64,
    },

    #[error("slope violation: {0}")]
    SlopeViolation(String),

    #[error("polynomial has vanishing gradient at the origin")]
    DegenerateGradient,

    #[error("spectra have different levels: {0} vs {1}")]
    LevelMismatch(usize, usize),

    #[error("measure has total mass {mass} (expected 2π)")]
    MassMismatch { mass: f64 },

    #[error("measure has an atom near t = {t} (jump {jump:e})")]
    AtomDetected { t: f64, jump: f64 },

    #[error("CDF does not reach its limits inside the window [{lo}, {hi}]")]
    WindowTooSmall { lo: f64, hi: f64 },

    #[error("lower bound a = {requested} is not certified (certified a = {certified})")]
    Uncertified { requested: f64, certified: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
