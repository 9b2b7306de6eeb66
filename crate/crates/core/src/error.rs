use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    /// A point or parameter lies outside the domain where an object is defined.
    #[error("domain violation: {0}")]
    Domain(String),

    /// Malformed input: wrong lengths, non-positive samples, bad parameters.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A stencil was applied to a field without boundary values.
    #[error("missing boundary closure: field has {got} samples, grid needs {expected}")]
    MissingBoundary { expected: usize, got: usize },

    /// Interpolation requested outside the support of a sampled field.
    #[error("interpolation outside grid support at radius {radius:.6} (support {support:.6})")]
    Interpolation { radius: f64, support: f64 },

    /// Newton iteration failed to reach the requested tolerance.
    #[error("newton failed at t={time:.6e} (dt={dt:.3e}): residual {residual:.3e} after {iterations} iterations")]
    NewtonFailure {
        time: f64,
        dt: f64,
        residual: f64,
        iterations: usize,
    },

    /// An iterative linear solve did not converge.
    #[error("linear solver did not converge: relative residual {0:.3e}")]
    LinearSolve(f64),

    /// Invariant broken inside the library; indicates a bug.
    #[error("internal error: {0}")]
    Internal(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
