use thiserror::Error;

/// Errors raised by the eigenvalue, hole-model and FEM routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The adaptive integrator could not make progress.
    #[error("integration failed at t = {t:.6e}: {reason}")]
    Integration { t: f64, reason: String },

    /// No sign change was found while bracketing a root.
    #[error("no sign change found on [{lo}, {hi}]: {what}")]
    Bracketing { lo: f64, hi: f64, what: String },

    /// An iterative method stopped before reaching its tolerance.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// A linear system was too badly conditioned to trust.
    #[error("ill-conditioned system (condition ~ {condition:.3e}): {hint}")]
    IllConditioned { condition: f64, hint: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
