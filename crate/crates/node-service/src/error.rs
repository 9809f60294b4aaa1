//! Service-level failures. Client-visible rejections travel as plain reason
//! strings inside [`crate::Response`]; this type covers everything else.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("consensus error: {0}")]
    Consensus(#[from] consensus_pbft::ConsensusError),

    #[error("ledger error: {0}")]
    Ledger(#[from] ledger_state::LedgerError),

    #[error("serialization failed: {0}")]
    Serialization(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Probe(String),
}
