//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("field F_{p}^{m} exceeds the 2^16 size limit")]
    FieldTooLarge { p: u64, m: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("incompatible fields: {0}")]
    IncompatibleFields(String),
    #[error("ambient dimensions do not match ({0} vs {1})")]
    AmbientMismatch(usize, usize),
    #[error("operand is not a subspace of the target space")]
    NotSubspace,
    #[error("enumeration needs {needed} vectors, cap is {cap}")]
    CapExceeded { needed: u128, cap: u64 },
    #[error("CSS condition violated: perp(C_Z) is not contained in C_X")]
    CssConditionViolated,
    #[error("block size {b} does not divide length {n}")]
    BadBlockSize { n: usize, b: usize },
    #[error("syndrome is inconsistent with the parity-check map")]
    InconsistentSyndrome,
    #[error("bilinear form is degenerate on the given pair of spaces")]
    Degenerate,
    #[error("parameter mismatch: {0}")]
    ParameterMismatch(String),
    #[error("vector is not in the required code")]
    NotInCode,
    #[error("operands lie in the same coset")]
    SameCoset,
    #[error("conditioning on a zero-probability event")]
    ZeroProbabilityEvent,
    #[error("no conditioning depth within budget achieved the target covariance")]
    BudgetExceeded,
    #[error("no codeword satisfies the covering promise")]
    EmptyPromise,
    #[error("mixing loop exceeded the iteration cap")]
    IterationCapExceeded,
    #[error("random regular graph rejected {0} times")]
    RetriesExceeded(u32),
    #[error("invalid experiment spec: {0}")]
    SpecError(String),
}

pub type Result<T> = std::result::Result<T, Error>;
