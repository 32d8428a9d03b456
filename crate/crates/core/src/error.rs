//! Error type shared by every module in the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid configuration or contract violation detected before any work.
    #[error("configuration error: {0}")]
    Config(String),

    /// Iterative solver exhausted its budget. Carries the residual history
    /// so callers can diagnose stagnation vs. slow convergence.
    #[error("solver did not converge: residual {final_residual:.3e} after {iterations} iterations")]
    NoConvergence {
        iterations: usize,
        final_residual: f64,
        history: Vec<f64>,
    },

    /// Mode-matching system too ill-conditioned to trust.
    #[error("ill-conditioned mode matching at order {order}: |det| = {determinant:.3e}")]
    IllConditioned { order: i32, determinant: f64 },

    /// Cusp/polygon reconstruction cannot proceed.
    #[error("reconstruction error: {0}")]
    Reconstruction(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
