use thiserror::Error;

/// Errors raised by the solvers, diagnostics and run orchestration.
#[derive(Debug, Error)]
pub enum Error {
    #[error("projection needs at least {required} samples, got {got}")]
    InsufficientSamples { required: usize, got: usize },

    #[error("resonant mode k={k}: lambda = omega^2 k^2")]
    Resonance { k: usize },

    #[error("singular radial system for mode {mode}: pivot {pivot:e} at row {row}")]
    SingularSystem { mode: String, row: usize, pivot: f64 },

    #[error("non-finite coefficients at t={t}")]
    Overflow { t: f64 },

    #[error("stationary iteration diverged after {iterations} iterations (residual {residual:e})")]
    Divergence {
        iterations: usize,
        residual: f64,
        last: Vec<f64>,
    },

    #[error("time step {dt:e} exceeds the explicit stability limit {limit:e}")]
    UnstableStep { dt: f64, limit: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name: name.to_string(),
        reason: reason.into(),
    }
}
