//! Error type shared across the library.

use thiserror::Error;

/// Errors produced by network construction, validation and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// A network violates a structural invariant (self-edge, bad node id,
    /// non-positive rate, dimension mismatch, ...).
    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    /// An initial condition is inconsistent with the network or not a
    /// probability vector.
    #[error("invalid initial condition: {0}")]
    InvalidInitialCondition(String),

    /// A scalar or vector parameter is out of its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The joint state space of the master equation exceeds the size guard.
    #[error("state space too large: {states} states exceeds limit {limit}")]
    StateSpaceTooLarge {
        /// Number of joint states the network would require.
        states: u128,
        /// Hard limit on the number of states.
        limit: u64,
    },

    /// A linear system solve hit a pivot too small to trust.
    #[error("singular matrix: {0}")]
    SingularMatrix(String),

    /// A probability left its admissible interval during time integration.
    #[error("integration failed at t = {t}: {reason}")]
    IntegrationFailure {
        /// Time at which the invariant was breached.
        t: f64,
        /// Description of the breach, including the offending node.
        reason: String,
    },

    /// A JSON document could not be parsed into the expected schema.
    #[error("parse error: {0}")]
    Parse(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
