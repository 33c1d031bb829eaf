use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid piece count {0}: must be even and at least 6")]
    InvalidPieceCount(usize),
    #[error("independence order {0} is invalid: must be at least 2")]
    InvalidIndependenceOrder(usize),
    #[error("piece count {pieces} too large for {what} (limit {limit})")]
    PieceCountTooLarge {
        pieces: usize,
        limit: usize,
        what: &'static str,
    },
    #[error("vector is empty")]
    EmptyVector,
    #[error("vector contains a non-finite entry at index {0}")]
    NonFinite(usize),
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("piece index {index} out of range for {pieces} pieces")]
    PieceIndexOutOfRange { index: usize, pieces: usize },
    #[error("not a permutation of 0..{0}")]
    InvalidPermutation(usize),
    #[error("sign vector must have entries in {{-1, +1}} with product -1")]
    InvalidSignVector,
    #[error("subset index {index} out of range 0..{pieces}")]
    InvalidSubset { index: usize, pieces: usize },
    #[error("recursion depth {depth} exceeds the configured cap {cap}")]
    DepthCap { depth: u32, cap: u32 },
    #[error("stabilization level exceeded the cap {0}")]
    StabilizationCap(u32),
    #[error("invalid window: lo {lo} > hi {hi}")]
    InvalidWindow { lo: i64, hi: i64 },
    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("unsupported moment order {0}")]
    UnsupportedPower(u32),
    #[error("unknown reference distribution '{0}'")]
    UnknownDistribution(String),
    #[error("tuple of size {size} exceeds the independence order {max}")]
    TupleTooLarge { size: usize, max: usize },
    #[error("index {0} lies outside the sampled window")]
    IndexOutOfWindow(i64),
    #[error("tuple indices must be distinct")]
    DuplicateIndex,
    #[error("{0}")]
    InvalidArgument(String),
}
