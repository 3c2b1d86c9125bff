use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid variable layout: {0}")]
    InvalidVarSpec(String),

    #[error("variable layouts differ: {left} vs {right}")]
    VarSpecMismatch { left: String, right: String },

    #[error("variable index {index} out of range for {total} variables")]
    IndexOutOfRange { index: usize, total: usize },

    #[error("negative exponent in non-divisor variable x{0}")]
    PoleOutsideDivisor(usize),

    #[error("element is not in the local ring (negative exponent in x{0})")]
    NotInLocalRing(usize),

    #[error("frame mismatch: {0}")]
    FrameMismatch(String),

    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },

    #[error("contraction into a degree-0 multivector")]
    ContractDegreeZero,

    #[error("matrix shape error: {0}")]
    Shape(String),

    #[error("matrix is not skew-symmetric: {0}")]
    NotSkew(String),

    #[error("matrix entries must be constant: {0}")]
    NotConstant(String),

    #[error("degenerate: {0}")]
    Degenerate(String),

    #[error("cannot certify normal crossings: {0}")]
    NotNormalCrossing(String),

    #[error("coefficient of d{i}^d{j} is not divisible by the log weights: {detail}")]
    NotLogarithmic { i: usize, j: usize, detail: String },

    #[error("matrix is not invertible over the localized ring: {0}")]
    NotInvertible(String),

    #[error("t = {t} out of range 1..={max}")]
    TOutOfRange { t: usize, max: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("differential does not respect the grading: {0}")]
    GradingViolation(String),

    #[error("projection onto the graded piece failed: {0}")]
    Projection(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
