//! Error types shared across the crate.

use thiserror::Error;

/// Unified error type for parameter validation, configuration, and the
/// analytical layer.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A structural parameter or function argument is outside its domain.
    /// The message names the offending quantity.
    #[error("domain error: {0}")]
    Domain(String),

    /// A run configuration is inconsistent (e.g. horizon not larger than
    /// burn-in, empty grid).
    #[error("config error: {0}")]
    Config(String),

    /// A requested target cannot be reached with any admissible noise level.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// The welfare objective has no interior maximizer.
    #[error("no interior optimum: {0}")]
    NoInteriorOptimum(String),

    /// The first-order condition has multiple roots on the search grid, so the
    /// objective is not single-peaked and no unique optimum can be reported.
    #[error("non-concave objective: {0}")]
    NonConcave(String),

    /// An iterative diagnostic exhausted its horizon before reaching the
    /// requested tolerance.
    #[error("not converged: {0}")]
    NotConverged(String),
}

pub type Result<T> = std::result::Result<T, Error>;
