use alloc::string::String;

/// Errors raised by the model, the bracket engine and the integrators.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid model dimensions: {0}")]
    InvalidSpec(String),
    #[error("parameter q_{0} is zero")]
    ZeroParameter(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("coordinates violate the regular locus: {0}")]
    RegularityViolation(String),
    #[error("degenerate factor during reconstruction: {0}")]
    Degenerate(String),
    #[error("sampling exhausted after {0} rejections")]
    SamplingExhausted(usize),
    #[error("singular factor: {0}")]
    SingularFactor(String),
    #[error("singular gauge element at vertex {0}")]
    SingularGauge(usize),
    #[error("X_{0} is not invertible")]
    SingularX(usize),
    #[error("singular element of the group H")]
    SingularH,
    #[error("matrix rows must sum to one (row {0})")]
    RowSum(usize),
    #[error("no bracket for pair: {0}")]
    UnknownPair(String),
    #[error("word longer than {0} letters")]
    WordTooLong(usize),
    #[error("ill-conditioned computation: {0}")]
    IllConditioned(String),
    #[error("invalid root branch: {0}")]
    BranchInvalid(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = core::result::Result<T, Error>;
