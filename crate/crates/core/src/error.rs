use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("slot {slot} out of range for tensor of order {order}")]
    SlotOutOfRange { slot: usize, order: usize },

    #[error("slot {0} used more than once")]
    SlotReused(usize),

    #[error("invalid permutation of {0} slots")]
    InvalidPermutation(usize),

    #[error("expected a tensor of order {expected}, got order {found}")]
    WrongOrder { expected: usize, found: usize },

    #[error("expected {expected} entries, got {found}")]
    WrongLength { expected: usize, found: usize },

    #[error(
        "tensor too large: dimension {dim}, order {order} (limits: dimension <= 4, order <= 10)"
    )]
    TooLarge { dim: usize, order: usize },

    #[error("dimension must be positive")]
    ZeroDimension,

    #[error("invalid rational literal {0:?}")]
    ParseRational(String),

    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),

    #[error("isomer order must be even and between 2 and 10, got {0}")]
    InvalidIsomerOrder(usize),

    #[error("slot pairs do not form a perfect matching: {0}")]
    NotAMatching(String),

    #[error("arity mismatch: {0}")]
    Arity(String),

    #[error("tensor is not symmetric")]
    NotSymmetric,

    #[error("generalized Kronecker size must be between 2 and 4, got {0}")]
    DeterminantSize(usize),

    #[error("invalid determinant slot labels: {0}")]
    DeterminantSlots(String),

    #[error("velocity gradient is not trace-free (tr U = {0}); deviatorize it explicitly")]
    Compressible(String),

    #[error("S must be trace-free in strict mode (tr S = {0})")]
    TraceFulStrain(String),

    #[error("expected {expected} coefficients, got {found}")]
    CoefficientCount { expected: usize, found: usize },

    #[error("invalid JSON input: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;
