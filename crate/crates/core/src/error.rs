use thiserror::Error;

/// Errors raised by the numerical and algebraic routines of this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("matrix is rank deficient (smallest singular value {sigma_min:e})")]
    RankDeficient { sigma_min: f64 },

    #[error("matrix is not a projection (deviation {deviation:e})")]
    NotProjection { deviation: f64 },

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },

    #[error("invalid group element: {0}")]
    InvalidElement(String),

    #[error("elements belong to different groups: {0} vs {1}")]
    MixedGroups(String, String),

    #[error("generating set is not symmetric: inverse of {0} missing")]
    NotSymmetric(String),

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("element {0} cannot be evaluated in this representation")]
    Unevaluable(String),

    #[error("coefficient `{0}` is not an exact rational")]
    Inexact(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
