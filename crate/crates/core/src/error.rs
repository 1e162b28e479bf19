use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("fractional order s = {0} must lie in the open interval (0, 1)")]
    InvalidOrder(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// `∫_Ω f + ∫_∂Ω g` does not vanish.
    #[error("compatibility violation: ∫f + ∫g = {residual:e} (tolerance {tolerance:e})")]
    CompatibilityViolation { residual: f64, tolerance: f64 },

    #[error("linear solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    SolverNotConverged { iterations: usize, residual: f64 },

    #[error("eigen-solver failed: {reason} (max residual {residual:e})")]
    EigenNotConverged { reason: String, residual: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_order(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidOrder(s))
    }
}
