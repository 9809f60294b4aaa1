//! Request/response shapes for the node API.
//!
//! The API is HTTP-style: four endpoints with JSON bodies. Over the
//! simulated transport a client constructs a [`Request`] directly and calls
//! [`crate::Cluster::handle`]; the optional socket listener in [`crate::http`]
//! parses real HTTP/1.1 traffic into the same type. Endpoints:
//!
//! | Method | Target                    | Request body | Success body          |
//! |--------|---------------------------|--------------|-----------------------|
//! | POST   | `/batches`                | batch JSON   | `{"id": ...}`         |
//! | GET    | `/batch_statuses?id=<id>` | none         | `{"id", "status"}`    |
//! | GET    | `/state/<address>`        | none         | `{"entries": [...]}`  |
//! | GET    | `/state?prefix=<hex>`     | none         | `{"entries": [...]}`  |
//!
//! A submission response only acknowledges entry into the pending queue; it
//! never implies the batch committed. Poll `/batch_statuses` for the outcome.

use consensus_pbft::BatchStatus;
use ledger_state::{canonical_json_string, Batch};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// A parsed client request.
#[derive(Debug, Clone, PartialEq)]
pub enum Request {
    /// `POST /batches` — submit a signed batch for ordering.
    SubmitBatch { batch: Batch },
    /// `GET /batch_statuses?id=` — the serving node's view of a batch.
    BatchStatus { id: String },
    /// `GET /state/{address}` — one committed entry, decoded to JSON.
    ReadAddress { address: String },
    /// `GET /state?prefix=` — all committed entries under a hex prefix.
    ReadPrefix { prefix: String },
}

impl Request {
    /// Parses an HTTP method and request target (plus body for POST) into a
    /// request. Returns a client-facing reason on any mismatch.
    pub fn from_http(method: &str, target: &str, body: &str) -> Result<Self, String> {
        let (path, query) = match target.split_once('?') {
            Some((p, q)) => (p, Some(q)),
            None => (target, None),
        };
        match (method, path) {
            ("POST", "/batches") => {
                let batch: Batch = serde_json::from_str(body)
                    .map_err(|e| format!("malformed batch body: {e}"))?;
                Ok(Request::SubmitBatch { batch })
            }
            ("GET", "/batch_statuses") => match query_param(query, "id") {
                Some(id) if !id.is_empty() => Ok(Request::BatchStatus { id }),
                _ => Err("missing query parameter: id".into()),
            },
            ("GET", "/state") => match query_param(query, "prefix") {
                Some(prefix) => Ok(Request::ReadPrefix { prefix }),
                None => Err("missing query parameter: prefix".into()),
            },
            ("GET", path) if path.starts_with("/state/") => {
                let address = path["/state/".len()..].to_string();
                if address.is_empty() {
                    Err("missing address".into())
                } else {
                    Ok(Request::ReadAddress { address })
                }
            }
            (m, p) => Err(format!("no route for {m} {p}")),
        }
    }
}

fn query_param(query: Option<&str>, name: &str) -> Option<String> {
    query?
        .split('&')
        .filter_map(|pair| pair.split_once('='))
        .find(|(k, _)| *k == name)
        .map(|(_, v)| v.to_string())
}

/// One committed ledger entry with its payload decoded from JSON text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateEntry {
    pub address: String,
    pub value: Value,
}

/// A service reply, ready to serialize as a JSON body.
#[derive(Debug, Clone, PartialEq)]
pub enum Response {
    /// Batch passed the door checks and entered the pending queue.
    Submitted { id: String },
    /// Batch never entered the queue; `reason` says why.
    Rejected { reason: String },
    /// Local view of a batch's lifecycle.
    Status { id: String, status: BatchStatus },
    /// Committed entries (possibly empty) for a read.
    Entries { entries: Vec<StateEntry> },
    /// Malformed request or read target.
    Error { reason: String },
}

impl Response {
    /// The HTTP status code this reply maps to. Submissions answer 202: the
    /// batch is accepted for ordering, not yet (and maybe never) committed.
    pub fn status_code(&self) -> u16 {
        match self {
            Response::Submitted { .. } => 202,
            Response::Status { .. } | Response::Entries { .. } => 200,
            Response::Rejected { .. } | Response::Error { .. } => 400,
        }
    }

    /// The canonical JSON body.
    pub fn to_json(&self) -> String {
        let value = match self {
            Response::Submitted { id } => serde_json::json!({ "id": id }),
            Response::Rejected { reason } | Response::Error { reason } => {
                serde_json::json!({ "error": reason })
            }
            Response::Status { id, status } => serde_json::json!({ "id": id, "status": status }),
            Response::Entries { entries } => serde_json::json!({ "entries": entries }),
        };
        canonical_json_string(&value).expect("response bodies are plain JSON")
    }
}
