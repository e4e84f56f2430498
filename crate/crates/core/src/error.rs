use thiserror::Error;

/// Errors raised by the numerical toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input violated a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Adaptive quadrature hit its subdivision limit before meeting tolerance.
    #[error("quadrature did not converge: estimate {estimate:e} with error {error:e}")]
    QuadratureDiverged { estimate: f64, error: f64 },

    /// ODE step size collapsed below the representable minimum.
    #[error("step size underflow at t = {t:e} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    /// Iterative routine ran out of budget.
    #[error("no convergence: {0}")]
    NoConvergence(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for errors caused by numerical non-convergence rather than bad input.
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::InvalidInput(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
