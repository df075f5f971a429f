use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("window [{lo}, {hi}] is too small: {reason}")]
    WindowTooSmall { lo: i64, hi: i64, reason: String },

    #[error("index {index} outside window [{lo}, {hi}]")]
    OutOfWindow { index: i64, lo: i64, hi: i64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error(
        "eigenvalue count mismatch: root search found {found}, argument principle counted {winding}; enlarge the window"
    )]
    EigenCountMismatch { found: usize, winding: i64 },

    #[error("padding violation: {0}")]
    Padding(String),

    #[error("boundary reflection: |u| = {edge:.3e} at the window edge exceeds {limit:.3e}; increase padding")]
    BoundaryReflection { edge: f64, limit: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("cross-validation failed: methods differ by {0:.3e}")]
    CrossValidation(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
