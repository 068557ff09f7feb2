use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpinError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("non-finite amplitude parameter: {0}")]
    InvalidAmplitude(String),

    #[error("value {value} is outside the eigenvalue ladder -{j}..={j}")]
    OutsideLadder { value: f64, j: f64 },

    #[error("operator does not conserve total excitation: entry ({row}, {col}) = {magnitude:e}")]
    Structure { row: usize, col: usize, magnitude: f64 },

    #[error("eigendecomposition failed on excitation block {block}")]
    Eigen { block: usize },

    #[error("mean spin vector vanishes; direction undefined")]
    UndefinedDirection,

    #[error("singular phase: |zeta| = 0")]
    SingularPhase,

    #[error("degenerate superposition: {0}")]
    Degenerate(String),

    #[error("unsupported initial state: {0}")]
    UnsupportedInitialState(String),

    #[error("truncation tail {tail:e} exceeds budget at cutoff {cutoff}; try cutoff {suggested}")]
    Cutoff { cutoff: usize, tail: f64, suggested: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, SpinError>;
