use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("modulus {0} outside supported range [2, 65536]")]
    ModulusOutOfRange(u32),
    #[error("non-invertible: 0 has no inverse modulo {0}")]
    NonInvertible(u32),
    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u32, right: u32 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("degenerate length: {0}")]
    Degenerate(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dependent set: vectors are linearly dependent")]
    DependentSet,
    #[error("resample required: Veronese image of the difference set is dependent")]
    ResampleRequired,
    #[error("characteristic too small: p = {p} must exceed degree {d}")]
    CharacteristicTooSmall { p: u32, d: usize },
    #[error("tensor is not symmetric")]
    NotSymmetric,
    #[error("feasibility cap exceeded: {what} requires {required} enumerated points, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        required: String,
        cap: u64,
    },
    #[error("regime too large for exhaustive subspace search ({0}); use Monte Carlo mode")]
    RegimeTooLarge(String),
    #[error("no beta on the search grid satisfies the bound: {0}")]
    NoBetaOnGrid(String),
    #[error("theorem check failed: {0}")]
    CheckFailed(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
