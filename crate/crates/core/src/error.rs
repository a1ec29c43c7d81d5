use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Error, Debug)]
pub enum Error {
    /// Input data violates a documented precondition (non-finite points, bad values).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("shape error: {0}")]
    Shape(String),

    /// Operation applied in the wrong state, e.g. normalizing twice.
    #[error("state error: {0}")]
    State(String),

    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),

    #[error("unsupported layer kind `{0}`")]
    UnsupportedKind(String),

    #[error("network spec error at layer {layer}: {msg}")]
    Spec { layer: usize, msg: String },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("manifest validation error: {0}")]
    Manifest(String),

    #[error(transparent)]
    Store(#[from] StoreError),

    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Failures specific to the binary VFT container.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum StoreError {
    #[error("bad magic: expected VFT1")]
    BadMagic,

    #[error("unsupported version {0}")]
    UnsupportedVersion(u16),

    #[error("truncated file: expected {expected} bytes, found {actual}")]
    Truncated { expected: u64, actual: u64 },

    #[error("payload checksum mismatch: header {expected:#010x}, computed {actual:#010x}")]
    PayloadChecksum { expected: u32, actual: u32 },

    #[error("header checksum mismatch")]
    HeaderChecksum,

    #[error("malformed header: {0}")]
    Malformed(String),
}
