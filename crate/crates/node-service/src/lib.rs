//! Client-facing node API for the ranking ledger.
//!
//! Binds a validator network behind four HTTP-style endpoints — batch
//! submission, status polling, and committed-state reads — plus a latency
//! probe that times the full write and read operation mix. The default
//! transport is simulated and hermetic: requests are plain values handled
//! in-process. A real TCP listener is available as an optional runtime mode
//! in [`http`].

pub mod api;
pub mod error;
pub mod http;
pub mod latency;
pub mod service;

pub use api::{Request, Response, StateEntry};
pub use consensus_pbft::BatchStatus;
pub use error::ServiceError;
pub use http::serve;
pub use latency::{run_latency_probe, LatencyReport, ProbeFixtures, READ_LABELS, WRITE_LABELS};
pub use service::Cluster;
