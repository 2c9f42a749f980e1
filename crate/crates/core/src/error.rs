use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interaction exponent x = {0}: only even x >= 2 is supported (odd x breaks the spin-inversion symmetry)")]
    InvalidExponent(u32),

    #[error("invalid spin value {0}: entries must be +1 or -1")]
    InvalidSpin(i64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("site index {index} out of range for {n} spins")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("p = {p} exceeds the exact pattern-average limit of {max}")]
    TooManyPatterns { p: usize, max: usize },

    #[error("N = {n} exceeds the dense density-matrix limit of {max}")]
    TooManySpins { n: usize, max: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state became non-finite at t = {t}")]
    Divergence { t: f64 },

    #[error("trajectory too short for classification: {0}")]
    TrajectoryTooShort(String),

    #[error("density matrix invariant violated at t = {t}: {what} = {value:e} (dt = {dt}; try a smaller step)")]
    InvariantViolation {
        t: f64,
        what: &'static str,
        value: f64,
        dt: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
