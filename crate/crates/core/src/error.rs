use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("mask {mask:#x} has bits outside the {n} coordinates")]
    InvalidMask { mask: u64, n: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("product space needs {required:.2} state bits but the cap is {allowed:.2}")]
    SpaceTooLarge { required: f64, allowed: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("structural failure: {0}")]
    Structural(String),

    #[error("quadrature did not converge: achieved error {achieved:.3e}, wanted {wanted:.3e}")]
    Quadrature { achieved: f64, wanted: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
