use thiserror::Error;

/// Errors raised by lattice computations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("malformed lattice expression: {0}")]
    Parse(String),
    #[error("unsupported lattice: {0}")]
    Unsupported(String),
    #[error("gram matrix is not symmetric")]
    NotSymmetric,
    #[error("gram matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("degenerate form (determinant zero)")]
    Degenerate,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("vectors are not linearly independent")]
    Dependent,
    #[error("zero vector has no divisibility")]
    ZeroVector,
    #[error("integer overflow in exact arithmetic")]
    Overflow,
    #[error("lattice is not negative definite")]
    NotNegativeDefinite,
    #[error("lattice is not even")]
    NotEven,
    #[error("discriminant group is not 2-elementary")]
    NotTwoElementary,
    #[error("identification not certified by invariants: {0}")]
    NotCertified(String),
    #[error("group too large for enumeration: {size} > {bound}")]
    TooLarge { size: u128, bound: u128 },
    #[error("classes belong to different discriminant forms")]
    MismatchedParents,
    #[error("invalid vector: {0}")]
    InvalidVector(String),
    #[error("not a root system: {0}")]
    NotRootSystem(String),
    #[error("wrong signature: expected {expected}, got ({p},{n})")]
    Signature { expected: String, p: usize, n: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("validation failed: {0}")]
    Validation(String),
}

pub type Result<T> = std::result::Result<T, LatticeError>;
