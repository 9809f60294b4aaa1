//! The transaction family: decodes command payloads, enforces role
//! permissions, and executes commands against the global state.
//!
//! Seven verbs exist. Five register data (`qi`, `cw`, `wmp`, `wmm`,
//! `method`), one computes and stores rankings (`qos`), and one
//! cross-checks everything and stores an audit report (`audit`).
//! Execution is a pure function of (transaction, pre-state, block height):
//! no clock, no randomness — every node replays a block to the identical
//! post-state, and every rejection reason is byte-identical across nodes.

mod audit;
mod error;
mod executor;
mod payload;
mod permissions;
mod qos;
mod registers;
mod stored;

pub use audit::{audit_run_id, run_audit, AuditCheck, AuditFiles, AuditFinding, AuditReport};
pub use error::ProcessorError;
pub use executor::{ExecutionContext, Executor};
pub use payload::{command_payload, Command, CommandPayload};
pub use permissions::PermissionTable;
pub use qos::assemble_purpose_inputs;
pub use stored::{
    registered_purposes, roster_address, Roster, StoredEvaluationRow, StoredQi, StoredRanking,
    StoredWeights, ROSTER_KEY,
};
