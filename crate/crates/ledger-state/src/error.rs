//! Error type shared across ledger structures.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LedgerError {
    #[error("address key must be non-empty")]
    EmptyKey,

    #[error("malformed address {0:?}: expected 70 lowercase hex characters")]
    MalformedAddress(String),

    #[error("malformed key material: {0}")]
    MalformedKey(String),

    #[error("signature does not verify")]
    InvalidSignature,

    #[error("digest mismatch: {0}")]
    DigestMismatch(String),

    #[error("payload is not valid UTF-8 JSON: {0}")]
    MalformedPayload(String),

    #[error("batch header lists transaction ids that do not match its contents")]
    BatchIdMismatch,

    #[error("block {height} does not link to previous digest {expected}")]
    BrokenChain { height: u64, expected: String },

    #[error("malformed stored record: {0}")]
    MalformedRecord(String),

    #[error("serialization failed: {0}")]
    Serialization(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
