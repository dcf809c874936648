use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid norm: {0}")]
    InvalidNorm(String),

    #[error("subspaces are not complementary: {0}")]
    NotComplementary(String),

    #[error("operator is not injective on the subspace (smallest/largest singular value {ratio:.3e})")]
    NotInjective { ratio: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("dimension {dim} exceeds the cap {cap} for {what}")]
    DimensionCap { what: &'static str, dim: usize, cap: usize },

    #[error("bound violated: {0}")]
    BoundViolated(String),

    #[error("limit not resolved within horizon {horizon}: last increment {last_gap:.3e}")]
    LimitNotResolved { horizon: usize, last_gap: f64 },

    #[error("cocycle is not injective at a sample point (floor {floor:.3e})")]
    Degenerate { floor: f64 },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config { path: path.into(), message: message.into() }
}
