use thiserror::Error;

/// Everything that can go wrong in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("signature mismatch between operands")]
    SignatureMismatch,

    #[error("not an orthonormal frame: gram residual {residual:.3e}")]
    NotOrthonormal { residual: f64 },

    #[error("frame is negatively oriented")]
    Orientation,

    #[error("vector is not null: <k,k> = {value:.3e}")]
    NotNull { value: f64 },

    #[error("zero vector where a direction was required")]
    ZeroVector,

    #[error("{0}")]
    Domain(String),

    #[error("point is off the model quadric by {residual:.3e}")]
    OffQuadric { residual: f64 },

    #[error("point is at the stereographic pole")]
    Pole,

    #[error("immersion is degenerate at ({u:.6}, {v:.6}): {reason}")]
    Degenerate { u: f64, v: f64, reason: String },

    #[error("induced metric is not spacelike at ({u:.6}, {v:.6})")]
    Signature { u: f64, v: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
