//! Deterministic rejection reasons.
//!
//! Every variant's display string is a pure function of the transaction and
//! pre-state, because rejection reasons are part of the replicated outcome:
//! all nodes must record the identical reason for an invalid batch.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProcessorError {
    #[error("permission denied: {command} requires {required}")]
    PermissionDenied { command: String, required: String },

    #[error("unknown signer: {0}")]
    UnknownSigner(String),

    #[error("unknown command: {0}")]
    UnknownCommand(String),

    #[error("malformed args for {command}: {detail}")]
    MalformedArgs { command: String, detail: String },

    #[error("{0} not registered for purpose: {1}")]
    MissingForPurpose(&'static str, String),

    #[error("quality indicator not registered: {0}")]
    MissingIndicator(String),

    #[error("no generators registered")]
    NoGenerators,

    #[error("no purposes registered")]
    NoPurposes,

    #[error("inconsistent evaluation rows: {0}")]
    InconsistentMetrics(String),

    #[error("inadmissible spec for purpose {purpose}: {}", violations.join("; "))]
    InvalidSpec {
        purpose: String,
        violations: Vec<String>,
    },

    #[error("ranking failed: {0}")]
    Ranking(String),

    #[error("corrupt state entry at {address}: {detail}")]
    CorruptState { address: String, detail: String },

    #[error(transparent)]
    Ledger(#[from] ledger_state::LedgerError),
}

impl ProcessorError {
    /// The replicated rejection reason recorded in receipts.
    pub fn reason(&self) -> String {
        self.to_string()
    }
}
