use alloc::string::String;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("structure error: {0}")]
    Structure(String),
    #[error("codebook of user {user} has average energy {energy}, expected 1")]
    Normalization { user: usize, energy: f64 },
    #[error("irregular factor graph: {0}")]
    IrregularGraph(String),
    #[error("no regular sparse pattern for U={users}, R={resources}")]
    UnsupportedShape { users: usize, resources: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("arithmetic overflow: {0}")]
    Overflow(String),
    #[error("expected {expected} items, got {actual}")]
    Length { expected: usize, actual: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("joint search space of {size} hypotheses exceeds the cap of {cap}")]
    SearchSpaceTooLarge { size: u128, cap: u128 },
    #[error("numerical underflow: {0}")]
    NumericalUnderflow(String),
    #[error("mismatched configurations: {0}")]
    MismatchedConfig(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
