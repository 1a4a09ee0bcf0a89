use thiserror::Error;

use crate::quadrature::IntegralResult;

/// Errors raised by the numerical engines and the physics layers built on them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside its admissible domain. `field` names the parameter.
    #[error("domain error in `{field}`: {reason}")]
    Domain { field: &'static str, reason: String },

    #[error("invalid configuration `{field}`: {reason}")]
    Config { field: &'static str, reason: String },

    /// An input violates an operation's precondition, e.g. (1+sE) < 0.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("operation not supported for the {0} deformation")]
    UnsupportedDeformation(&'static str),

    /// The requested box level sits beyond the tan² pole at `n_star`.
    #[error("level n={n} is beyond the divergence at n*={n_star}")]
    OutOfDomain { n: u64, n_star: f64 },

    /// The integral exists only outside the supported parameter range.
    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),

    /// Adaptive quadrature ran out of subdivisions; `best` holds the last estimate.
    #[error("tolerance not met: |err| {} > target after {} subdivisions", best.est_abs_error, best.subdivisions_used)]
    ToleranceNotMet { best: IntegralResult },

    #[error("endpoint singularity x^{0} is not integrable (need exponent > -1)")]
    SingularityTooStrong(f64),

    #[error("evaluation failed: {0}")]
    Evaluation(String),

    /// A discrete level sum whose neglected tail is not small against the sum.
    #[error("level sum truncated: tail bound {tail_bound} against partial sum {partial}")]
    Truncation { partial: f64, tail_bound: f64 },

    /// Two routes that must agree did not.
    #[error("cross-check failed: {what} ({a} vs {b})")]
    CrossCheck { what: &'static str, a: f64, b: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(field: &'static str, reason: impl Into<String>) -> Error {
    Error::Domain {
        field,
        reason: reason.into(),
    }
}

pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Error {
    Error::Config {
        field,
        reason: reason.into(),
    }
}
