//! Crate-wide error type.

use crate::numerics::QuadratureResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Scenario validation failed; every violated invariant is listed with
    /// its field path.
    #[error("invalid scenario:\n{}", .violations.join("\n"))]
    InvalidScenario { violations: Vec<String> },

    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature hit its subdivision limit before meeting the
    /// requested tolerance. The best estimate so far is carried along.
    #[error(
        "quadrature did not converge: estimate {} with error {} after {} evaluations",
        .best.value, .best.abs_error_estimate, .best.evaluations
    )]
    QuadratureNonConvergence { best: QuadratureResult },

    /// Scenario configuration file could not be parsed or converted.
    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
