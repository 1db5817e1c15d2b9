use thiserror::Error;

/// Errors raised by the spectral toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("layout error: {0}")]
    Layout(String),

    /// l = 0 content of an argument to the inverse angular Laplacian exceeded tolerance.
    #[error("gauge violation: l=0 content has norm {norm:.3e} (tolerance {limit:.3e}){context}")]
    GaugeViolation {
        norm: f64,
        limit: f64,
        context: String,
    },

    #[error("pipeline type error: {0}")]
    Spec(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
