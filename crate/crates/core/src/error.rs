use thiserror::Error;

/// Errors produced by the numerical kernel and the analytical models.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of a function.
    #[error("domain error in {function}: {detail}")]
    Domain {
        function: &'static str,
        detail: String,
    },

    /// An iterative method or adaptive integrator ran out of budget.
    #[error("no convergence in {what}: {detail}")]
    NonConvergence { what: String, detail: String },

    /// Frequency outside the validity band of the simplified absorption model.
    #[error("frequency {frequency_hz:.6e} Hz is outside the 275-400 GHz validity band of the simplified absorption model")]
    OutOfBand { frequency_hz: f64 },

    /// Invalid model or simulation parameters.
    #[error("invalid parameter `{name}`: {detail}")]
    InvalidParameter { name: &'static str, detail: String },

    /// A tier's association probability is too small to condition on.
    #[error("association probability of the {tier} tier is {probability:e}; cannot condition on it")]
    DegenerateTier {
        tier: &'static str,
        probability: f64,
    },
}

impl Error {
    pub(crate) fn domain(function: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            function,
            detail: detail.into(),
        }
    }

    pub(crate) fn invalid(name: &'static str, detail: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            detail: detail.into(),
        }
    }

    /// Prefixes the name of the enclosing computation onto a non-convergence error,
    /// so that a failure deep inside a nested integral names the outer quantity too.
    pub fn within(self, outer: &str) -> Self {
        match self {
            Error::NonConvergence { what, detail } => Error::NonConvergence {
                what: format!("{outer} / {what}"),
                detail,
            },
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
