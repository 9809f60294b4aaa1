//! Byzantine fault tolerant ordering for the ledger: a simplified PBFT
//! engine plus a deterministic network simulation to run it in.
//!
//! The pieces:
//!
//! - [`NetworkConfig`] describes the validator set (`n ≥ 3f + 1` enforced),
//!   timing, the link delay/drop model, and any injected faults;
//! - [`Node`] is one validator's state machine — propose, prepare, commit,
//!   view change — driven purely by submissions, messages, and timers;
//! - [`Simulation`] wires n nodes together over a seeded discrete-event
//!   transport, so every run is reproducible down to the trace bytes;
//! - [`Trace`] records submissions, message fates, commits, and view
//!   changes, and exports as JSON lines.
//!
//! Safety comes from 2f+1 vote quorums and from re-proposing prepared
//! blocks across view changes; liveness under message loss comes from
//! periodic retransmission and block transfer with commit certificates.

mod config;
mod error;
mod message;
mod node;
mod sim;

pub use config::{FaultKind, FaultSpec, LinkModel, NetworkConfig};
pub use error::ConsensusError;
pub use message::{
    quorum_holds, CertifiedBlock, ConsensusMessage, MessageKind, PreparedCertificate,
};
pub use node::{BatchStatus, Node, NodeConfig, Output};
pub use sim::{build_genesis, run_simulation, Simulation, Trace, TraceEvent, WorkloadItem};
