//! The cluster facade: a simulated validator network behind the node API.
//!
//! [`Cluster`] owns a [`Simulation`] and exposes each validator's
//! client-facing operations. Submission performs the door checks (structure
//! and signatures) synchronously, hands the batch to the chosen node, and
//! returns its id; ordering and commit happen as the simulation runs. Callers
//! drive background progress explicitly with [`Cluster::settle`], which keeps
//! every test hermetic and every replay deterministic.
//!
//! Reads only ever see a node's committed state: speculative execution
//! results live inside the consensus engine until a commit quorum forms, so
//! an uncommitted batch is invisible here by construction.

use consensus_pbft::{BatchStatus, NetworkConfig, Simulation};
use ledger_state::{Address, Batch, LedgerError};
use serde_json::Value;

use crate::api::{Request, Response, StateEntry};
use crate::error::ServiceError;

/// A running validator network with the client API on every node.
pub struct Cluster {
    sim: Simulation,
}

impl Cluster {
    /// Boots a fresh network from a config and genesis settings document.
    pub fn new(config: NetworkConfig, genesis_settings: Value) -> Result<Self, ServiceError> {
        Ok(Cluster {
            sim: Simulation::new(config, genesis_settings)?,
        })
    }

    /// Boots a network and replays a submission log through it, settling
    /// after each entry. Replaying the same log over the same config yields
    /// the same chain, which is what lets a file-backed client rebuild its
    /// node between invocations.
    pub fn replay(
        config: NetworkConfig,
        genesis_settings: Value,
        submissions: impl IntoIterator<Item = (usize, Batch)>,
    ) -> Result<Self, ServiceError> {
        let mut cluster = Cluster::new(config, genesis_settings)?;
        for (node, batch) in submissions {
            let _ = cluster.submit(node, batch);
            cluster.settle();
        }
        Ok(cluster)
    }

    pub fn node_count(&self) -> usize {
        self.sim.nodes().len()
    }

    /// Direct access to the underlying simulation (trace export, clocks).
    pub fn simulation(&self) -> &Simulation {
        &self.sim
    }

    /// Submits a batch to one node. On success the batch is in that node's
    /// pending queue (status `Pending` at minimum) and the returned id can be
    /// polled; acceptance never implies the batch will commit. Rejections
    /// come back as client-facing reasons.
    pub fn submit(&mut self, node: usize, batch: Batch) -> Result<String, String> {
        let id = batch.id().map_err(|e| e.to_string())?;
        batch.verify().map_err(|e| match e {
            LedgerError::InvalidSignature => "invalid signature".to_string(),
            other => other.to_string(),
        })?;
        self.sim.submit_now(node, batch);
        // Step just far enough for the serving node to ingest the submission;
        // gossip and consensus stay queued until the caller settles.
        while matches!(self.sim.node(node).status(&id), BatchStatus::Unknown) {
            if !self.sim.step() {
                break;
            }
        }
        Ok(id)
    }

    /// Runs the network until no messages or timers remain. Stands in for
    /// the background progress a real deployment makes between requests.
    pub fn settle(&mut self) {
        self.sim.run();
    }

    /// The serving node's local view of a batch.
    pub fn status(&self, node: usize, id: &str) -> BatchStatus {
        self.sim.node(node).status(id)
    }

    /// Reads one committed entry. Unknown addresses yield an empty list;
    /// malformed addresses are an error.
    pub fn read_address(&self, node: usize, address: &str) -> Result<Vec<StateEntry>, String> {
        let parsed: Address = address.parse().map_err(|e: LedgerError| e.to_string())?;
        let state = self.sim.node(node).state();
        match state.get_json(&parsed).map_err(|e| e.to_string())? {
            Some(value) => Ok(vec![StateEntry {
                address: address.to_string(),
                value,
            }]),
            None => Ok(vec![]),
        }
    }

    /// Reads every committed entry under a hex prefix (a 6-character prefix
    /// selects a whole category). Entries come back in address order.
    pub fn read_prefix(&self, node: usize, prefix: &str) -> Result<Vec<StateEntry>, String> {
        if prefix.len() > 70 || !prefix.chars().all(|c| c.is_ascii_hexdigit() && !c.is_uppercase())
        {
            return Err(format!(
                "malformed prefix {prefix:?}: expected up to 70 lowercase hex characters"
            ));
        }
        let state = self.sim.node(node).state();
        let mut entries = Vec::new();
        for (address, text) in state.entries_with_prefix(prefix) {
            let value: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
            entries.push(StateEntry {
                address: address.to_string(),
                value,
            });
        }
        Ok(entries)
    }

    /// Routes one API request against one node. Pure request handling: the
    /// caller (or the socket listener) decides when to settle.
    pub fn handle(&mut self, node: usize, request: Request) -> Response {
        match request {
            Request::SubmitBatch { batch } => match self.submit(node, batch) {
                Ok(id) => Response::Submitted { id },
                Err(reason) => Response::Rejected { reason },
            },
            Request::BatchStatus { id } => {
                let status = self.status(node, &id);
                Response::Status { id, status }
            }
            Request::ReadAddress { address } => match self.read_address(node, &address) {
                Ok(entries) => Response::Entries { entries },
                Err(reason) => Response::Error { reason },
            },
            Request::ReadPrefix { prefix } => match self.read_prefix(node, &prefix) {
                Ok(entries) => Response::Entries { entries },
                Err(reason) => Response::Error { reason },
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ledger_state::{keypair_from_seed, public_key_hex, Transaction};
    use serde_json::json;
    use txn_processor::{command_payload, Command};

    fn manager() -> ledger_state::SigningKey {
        keypair_from_seed([7; 32])
    }

    fn cluster() -> Cluster {
        let settings = json!({"roles": {public_key_hex(&manager()): "product_manager"}});
        Cluster::new(NetworkConfig::honest(4, 1, 42), settings).unwrap()
    }

    fn weight_batch(purpose: &str) -> Batch {
        let key = manager();
        let payload = command_payload(Command::Cw, json!({purpose: {"fidelity": 1.0}}));
        let txn = Transaction::build(&key, vec![], vec![], &payload).unwrap();
        Batch::build(&key, vec![txn]).unwrap()
    }

    #[test]
    fn submission_is_pending_until_settled() {
        let mut cluster = cluster();
        let id = cluster.submit(0, weight_batch("p")).unwrap();
        assert!(matches!(cluster.status(0, &id), BatchStatus::Pending));
        cluster.settle();
        assert!(matches!(
            cluster.status(0, &id),
            BatchStatus::Committed { height: 1 }
        ));
    }

    #[test]
    fn malformed_prefix_is_rejected() {
        let cluster = cluster();
        assert!(cluster.read_prefix(0, "XYZ").is_err());
        assert!(cluster.read_prefix(0, &"a".repeat(71)).is_err());
        assert_eq!(cluster.read_prefix(0, "abc123").unwrap(), vec![]);
    }

    #[test]
    fn replay_reproduces_the_same_chain() {
        let settings = json!({"roles": {public_key_hex(&manager()): "product_manager"}});
        let log = vec![(0, weight_batch("p")), (1, weight_batch("q"))];
        let a = Cluster::replay(NetworkConfig::honest(4, 1, 42), settings.clone(), log.clone())
            .unwrap();
        let b = Cluster::replay(NetworkConfig::honest(4, 1, 42), settings, log).unwrap();
        assert_eq!(a.sim.node(0).committed_height(), 2);
        assert_eq!(a.sim.node(0).head_digest(), b.sim.node(0).head_digest());
        assert_eq!(a.sim.node(0).state_root(), b.sim.node(0).state_root());
    }
}
