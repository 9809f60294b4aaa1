//! Error type for consensus configuration and simulation.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConsensusError {
    /// The network configuration is unusable (e.g. violates `n ≥ 3f + 1`).
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A batch submitted to a node was rejected at the door.
    #[error("batch rejected: {0}")]
    BatchRejected(String),

    #[error(transparent)]
    Ledger(#[from] ledger_state::LedgerError),

    #[error(transparent)]
    Processor(#[from] txn_processor::ProcessorError),

    #[error(transparent)]
    Serialization(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
