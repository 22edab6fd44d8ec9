use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// The requested evaluation sits on a genuine pole.
    #[error("pole of {what} at {at}")]
    Pole { what: &'static str, at: Complex64 },

    /// Pole of the continued Riesz potential, with a numerical residue estimate.
    #[error("Riesz potential has a pole at alpha = {alpha} (residue estimate {residue})")]
    RieszPole { alpha: Complex64, residue: Complex64 },

    #[error("order {alpha} outside the admissible strip {lower} < Re < {upper}")]
    StripViolation {
        alpha: Complex64,
        lower: f64,
        upper: f64,
    },

    #[error("order {0} is a negative integer; use the closed form at negative integers")]
    NegativeInteger(i64),

    #[error("divergent integral: {0}")]
    Divergence(String),

    #[error("Taylor coefficient of order {0} is not available")]
    MissingCoefficient(usize),

    #[error("numerical Taylor coefficient of order {order} did not converge (error estimate {estimate:e})")]
    TaylorFailure { order: usize, estimate: f64 },

    #[error("limit extrapolation did not converge: trace {trace:?}")]
    NonConvergence { trace: Vec<f64> },

    #[error("function class violation: {0}")]
    ClassViolation(String),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Short name of the error class, for reports.
    pub fn class(&self) -> &'static str {
        match self {
            Error::Pole { .. } => "pole",
            Error::RieszPole { .. } => "riesz-pole",
            Error::StripViolation { .. } => "strip-violation",
            Error::NegativeInteger(_) => "negative-integer",
            Error::Divergence(_) => "divergence",
            Error::MissingCoefficient(_) => "missing-coefficient",
            Error::TaylorFailure { .. } => "taylor-failure",
            Error::NonConvergence { .. } => "non-convergence",
            Error::ClassViolation(_) => "class-violation",
            Error::Degenerate(_) => "degenerate",
            Error::Quadrature(_) => "quadrature",
            Error::InvalidArgument(_) => "invalid-argument",
        }
    }
}
