//! Error type shared by all modules.

use thiserror::Error;

/// Errors surfaced by closed forms, linear algebra, and optimizers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A closed form was evaluated at a point where a live denominator
    /// vanishes (within the degeneracy threshold). The message names the
    /// denominator and the offending parameters.
    #[error("degenerate denominator: {context} = {value:.3e} (|.| < {tol:.1e}) at {params}")]
    DegenerateDenominator {
        /// The denominator expression that vanished.
        context: &'static str,
        /// Its value at the offending point.
        value: f64,
        /// Threshold it fell under.
        tol: f64,
        /// Human-readable parameter dump.
        params: String,
    },

    /// An argument violated a precondition (sizes, ranges, variant/cut
    /// combinations, overlapping index sets).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An iterative numerical routine failed to converge.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn degenerate(
        context: &'static str,
        value: f64,
        tol: f64,
        params: impl Into<String>,
    ) -> Self {
        Error::DegenerateDenominator {
            context,
            value,
            tol,
            params: params.into(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
