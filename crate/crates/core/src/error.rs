use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid probability vector: {0}")]
    InvalidProbVec(String),

    #[error("invalid weight vector: {0}")]
    InvalidWeights(String),

    #[error("invalid logits: {0}")]
    InvalidLogits(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("absolute continuity violated at index {index}: p = {p}, q = 0")]
    AbsoluteContinuityViolation { index: usize, p: f64 },

    #[error("index {index} out of range for {len} classes")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("label distribution is not one-hot")]
    NotOneHot,

    #[error("invalid loss configuration: {0}")]
    InvalidLossSpec(String),

    #[error("{kind} has no finite upper bound (clamped bound would be {clamp_bound:.3})")]
    UnboundedLoss { kind: String, clamp_bound: f64 },

    #[error("enumeration needs {needed} evaluations, cap is {cap}")]
    ResourceCap { needed: u128, cap: u128 },

    #[error("noise rate {eta} not admissible: {reason}")]
    InvalidNoiseRate { eta: f64, reason: String },

    #[error("invalid noise specification: {0}")]
    InvalidNoiseSpec(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("truncated CIFAR file {path}: {len} bytes is not a multiple of 3073")]
    TruncatedFile { path: String, len: usize },

    #[error("invalid label {label} in record {record}")]
    InvalidLabel { record: usize, label: u8 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },

    #[error("non-finite function value during finite differencing")]
    NonFiniteValue,

    #[error("io error: {0}")]
    Io(String),

    #[error("serialization error: {0}")]
    Serde(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
