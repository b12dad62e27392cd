use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows} x {cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is asymmetric: max |a_ij - a_ji| = {defect:e}")]
    Asymmetric { defect: f64 },

    #[error("negative entry {value:e} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("edge mass sums to {sum:.17} instead of 1")]
    MassNotNormalized { sum: f64 },

    #[error("vertex {index} has degree {degree:e} <= 0")]
    ZeroDegree { index: usize, degree: f64 },

    #[error("eigensolver did not converge after {rotations} rotations")]
    NoConvergence { rotations: usize },

    #[error("dimension mismatch: {detail}")]
    DimensionMismatch { detail: String },

    #[error("noise rate {gamma} outside [0, {max})")]
    NoiseRateOutOfRange { gamma: f64, max: f64 },

    #[error("labeled data is not class-balanced: defect {defect:e}")]
    NotClassBalanced { defect: f64 },

    #[error("mixture weight {theta} outside [0, 1]")]
    ThetaOutOfRange { theta: f64 },

    #[error("invalid scenario config: {reason}")]
    ConfigInvalid { reason: String },

    #[error("training diverged after {iters} iterations")]
    Diverged { iters: usize },

    #[error("positive-pair mass {mass:e} too small to sample")]
    SamplerUnderflow { mass: f64 },

    #[error("denominator {value:e} below tolerance")]
    DegenerateDenominator { value: f64 },

    #[error("noise-rate threshold undefined: radicand {radicand:e}")]
    UndefinedThreshold { radicand: f64 },

    #[error("empty embedding-dimension range [{lo}, {hi}]")]
    EmptyKRange { lo: usize, hi: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("normal system is numerically singular: condition {condition:e}")]
    SingularSystem { condition: f64 },

    #[error("matrix size {n} exceeds cap {cap}")]
    MatrixTooLarge { n: usize, cap: usize },

    #[error("malformed input: {detail}")]
    Format { detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
