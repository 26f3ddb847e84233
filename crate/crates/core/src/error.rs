use thiserror::Error;

/// Failures raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A precondition on the inputs was violated.
    #[error("contract violation: {0}")]
    Contract(String),
    /// A user-supplied function returned a non-finite value.
    #[error("evaluation failed at {at}: got {value}")]
    Evaluation { at: f64, value: f64 },
    /// A limit or extrapolation sequence did not settle.
    #[error("no convergence: {0}")]
    Convergence(String),
    /// The covariance matrix could not be factorized even after jitter.
    #[error("factorization failed: {0}")]
    Factorization(String),
    /// Requested step count is below the explicit-stepping stability limit.
    #[error("unstable step size: {n_steps} steps requested, at least {min_steps} required")]
    Stability { n_steps: usize, min_steps: usize },
    /// An internal consistency check tripped.
    #[error("internal consistency: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}

/// Evaluates `f` and rejects NaN or infinite values.
pub(crate) fn checked(at: f64, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Evaluation { at, value })
    }
}
