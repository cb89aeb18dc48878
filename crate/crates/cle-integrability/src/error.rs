use thiserror::Error;

/// Errors raised by the evaluators, integrators and samplers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("quadrature did not converge: value {value:e}, error estimate {err_est:e} after {evaluations} evaluations")]
    NonConvergence { value: f64, err_est: f64, evaluations: usize },

    #[error("argument of {factor} is within tolerance of a pole or zero at {re}{im:+}i")]
    PoleHit { factor: String, re: f64, im: f64 },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("imaginary part {im:e} is not negligible against real part {re:e}")]
    ImaginaryLeak { re: f64, im: f64 },

    #[error("event budget of {budget} exceeded")]
    BudgetExceeded { budget: u64 },

    #[error("linear solver failed: {0}")]
    SolverFailure(String),

    #[error("degenerate sample: {0}")]
    Degenerate(String),
}

impl Error {
    /// Short variant name, used in machine-readable output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonConvergence { .. } => "NonConvergence",
            Error::PoleHit { .. } => "PoleHit",
            Error::DomainError(_) => "DomainError",
            Error::ImaginaryLeak { .. } => "ImaginaryLeak",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::SolverFailure(_) => "SolverFailure",
            Error::Degenerate(_) => "Degenerate",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::DomainError(msg.into())
}
