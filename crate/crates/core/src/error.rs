use thiserror::Error;

use crate::cx::Cx;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Invalid construction parameters (orders, dimensions, coefficient sets).
    #[error("configuration error: {0}")]
    Config(String),

    /// API misuse that is not a numerical problem, e.g. asking for a partial
    /// beyond the jet order.
    #[error("usage error: {0}")]
    Usage(String),

    /// An elementary function was evaluated on or too close to a pole or
    /// branch cut.
    #[error("domain error in {func} at argument {arg}: {reason}")]
    Domain { func: &'static str, arg: Cx, reason: String },

    /// A profile integral has a non-integrable singularity at its base point.
    #[error("singular profile g_{k}: denominator {denominator:e} at base point {base}")]
    SingularProfile { k: usize, base: f64, denominator: f64 },

    #[error(
        "quadrature did not converge after {evaluations} evaluations (worst subinterval [{worst_a}, {worst_b}], error estimate {error:e})"
    )]
    Accuracy {
        evaluations: usize,
        worst_a: f64,
        worst_b: f64,
        error: f64,
    },

    /// Isotropic vectors, singular metrics and rank-deficient frames.
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
}

impl Error {
    pub fn domain(func: &'static str, arg: Cx, reason: impl Into<String>) -> Self {
        Error::Domain {
            func,
            arg,
            reason: reason.into(),
        }
    }

    /// Whether this error belongs to the numerical-domain class (as opposed
    /// to configuration or usage problems).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Domain { .. } | Error::SingularProfile { .. } | Error::Accuracy { .. } | Error::Degenerate(_)
        )
    }
}
