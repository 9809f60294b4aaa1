//! Deterministic discrete-event simulation of a validator network.
//!
//! Events — message deliveries, client submissions, node timers — sit in a
//! priority queue keyed by (time, insertion order). Link delays and drops
//! are sampled from a single seeded RNG in event order, so a configuration
//! and workload replay to byte-identical traces; changing the seed changes
//! delivery interleavings without touching node logic. Byzantine behavior
//! is injected at the transport boundary: a fault wrapper may mute, delay,
//! equivocate, or corrupt what an otherwise honest node sends.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use ledger_state::{canonical_json_string, Batch, Block, SigningKey};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use serde_json::Value;

use crate::config::{FaultKind, NetworkConfig};
use crate::error::ConsensusError;
use crate::message::{ConsensusMessage, MessageKind};
use crate::node::{Node, NodeConfig, Output};

/// One client submission scheduled into a run.
#[derive(Debug, Clone)]
pub struct WorkloadItem {
    pub at: u64,
    pub node: usize,
    pub batch: Batch,
}

/// Everything observable about a run, in event order.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Submission {
        time: u64,
        node: usize,
        batch_id: Option<String>,
        accepted: bool,
        reason: Option<String>,
    },
    Message {
        time: u64,
        from: usize,
        to: usize,
        kind: String,
        view: u64,
        sequence: u64,
        delivered: bool,
    },
    Commit {
        time: u64,
        node: usize,
        height: u64,
        digest: String,
        state_root: String,
    },
    ViewEntered {
        time: u64,
        node: usize,
        view: u64,
    },
}

/// The full record of a simulation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trace {
    pub seed: u64,
    pub ended_at: u64,
    pub final_heights: Vec<u64>,
    pub final_roots: Vec<String>,
    pub final_views: Vec<u64>,
    pub events: Vec<TraceEvent>,
}

impl Trace {
    /// One JSON line per event, preceded by a summary header line.
    pub fn to_jsonl(&self) -> String {
        #[derive(Serialize)]
        struct Header<'a> {
            seed: u64,
            ended_at: u64,
            final_heights: &'a [u64],
            final_roots: &'a [String],
            final_views: &'a [u64],
        }
        let mut lines = vec![canonical_json_string(&Header {
            seed: self.seed,
            ended_at: self.ended_at,
            final_heights: &self.final_heights,
            final_roots: &self.final_roots,
            final_views: &self.final_views,
        })
        .expect("serialize trace header")];
        for event in &self.events {
            lines.push(canonical_json_string(event).expect("serialize trace event"));
        }
        let mut text = lines.join("\n");
        text.push('\n');
        text
    }

    /// Commit events for one node, as (height, digest) in commit order.
    pub fn commits_of(&self, node: usize) -> Vec<(u64, String)> {
        self.events
            .iter()
            .filter_map(|e| match e {
                TraceEvent::Commit {
                    node: n,
                    height,
                    digest,
                    ..
                } if *n == node => Some((*height, digest.clone())),
                _ => None,
            })
            .collect()
    }

    /// Safety check: no two nodes committed different blocks at one height.
    pub fn no_conflicting_commits(&self) -> bool {
        let mut by_height: BTreeMap<u64, &str> = BTreeMap::new();
        for event in &self.events {
            if let TraceEvent::Commit { height, digest, .. } = event {
                match by_height.get(height) {
                    Some(seen) if *seen != digest => return false,
                    _ => {
                        by_height.insert(*height, digest);
                    }
                }
            }
        }
        true
    }

    /// Views a node entered, in order.
    pub fn views_entered_by(&self, node: usize) -> Vec<u64> {
        self.events
            .iter()
            .filter_map(|e| match e {
                TraceEvent::ViewEntered { node: n, view, .. } if *n == node => Some(*view),
                _ => None,
            })
            .collect()
    }
}

#[derive(Debug)]
enum EventPayload {
    Deliver { to: usize, message: ConsensusMessage },
    Submit { to: usize, batch: Batch },
    Timer { node: usize, token: u64 },
}

#[derive(Debug)]
struct Scheduled {
    at: u64,
    seq: u64,
    payload: EventPayload,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.at == other.at && self.seq == other.seq
    }
}
impl Eq for Scheduled {}
impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Scheduled {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.at, self.seq).cmp(&(other.at, other.seq))
    }
}

/// Builds the height-0 block all validators start from. The given settings
/// gain a `validators` entry recording the membership, and must carry the
/// role map (`{"roles": {...}}`) if any client is to pass permission checks.
pub fn build_genesis(config: &NetworkConfig, settings: Value) -> Result<Block, ConsensusError> {
    let mut settings = settings;
    if let Some(object) = settings.as_object_mut() {
        object.insert(
            "validators".into(),
            serde_json::to_value(config.public_keys())?,
        );
    }
    let empty_root = ledger_state::GlobalState::new().state_root();
    Ok(Block::genesis(&config.genesis_key(), settings, empty_root)?)
}

/// A network of validators plus the scheduler that drives them.
pub struct Simulation {
    config: NetworkConfig,
    nodes: Vec<Node>,
    node_keys: Vec<SigningKey>,
    faults: BTreeMap<usize, FaultKind>,
    heap: BinaryHeap<Reverse<Scheduled>>,
    next_seq: u64,
    now: u64,
    rng: ChaCha20Rng,
    events: Vec<TraceEvent>,
}

impl Simulation {
    pub fn new(config: NetworkConfig, genesis_settings: Value) -> Result<Self, ConsensusError> {
        config.validate()?;
        let genesis = build_genesis(&config, genesis_settings)?;
        let public_keys = config.public_keys();
        let node_keys: Vec<SigningKey> = (0..config.n).map(|id| config.node_key(id)).collect();
        let nodes = (0..config.n)
            .map(|id| {
                Node::new(
                    NodeConfig {
                        id,
                        n: config.n,
                        f: config.f,
                        public_keys: public_keys.clone(),
                        progress_timeout: config.progress_timeout,
                        retransmit_interval: config.retransmit_interval,
                    },
                    config.node_key(id),
                    genesis.clone(),
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        let faults = config
            .faults
            .iter()
            .map(|spec| (spec.node, spec.kind))
            .collect();
        let rng = ChaCha20Rng::seed_from_u64(config.seed);
        Ok(Simulation {
            config,
            nodes,
            node_keys,
            faults,
            heap: BinaryHeap::new(),
            next_seq: 0,
            now: 0,
            rng,
            events: Vec::new(),
        })
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Schedules a client submission for `at` ticks into the run.
    pub fn submit_at(&mut self, at: u64, node: usize, batch: Batch) {
        let at = at.max(self.now);
        self.push(at, EventPayload::Submit { to: node, batch });
    }

    /// Schedules a client submission for the current instant.
    pub fn submit_now(&mut self, node: usize, batch: Batch) {
        self.submit_at(self.now, node, batch);
    }

    /// Runs until the network quiesces or `max_time` passes.
    pub fn run(&mut self) {
        while self.step() {}
    }

    /// Processes one event; false when the run is over.
    pub fn step(&mut self) -> bool {
        let Some(Reverse(next)) = self.heap.pop() else {
            return false;
        };
        if next.at > self.config.max_time {
            self.now = self.config.max_time;
            return false;
        }
        self.now = next.at;
        match next.payload {
            EventPayload::Deliver { to, message } => {
                let outputs = self.nodes[to].handle_message(message, self.now);
                self.dispatch(to, outputs);
            }
            EventPayload::Submit { to, batch } => {
                let (result, outputs) = self.nodes[to].submit_batch(batch, self.now);
                let (batch_id, accepted, reason) = match result {
                    Ok(id) => (Some(id), true, None),
                    Err(reason) => (None, false, Some(reason)),
                };
                self.events.push(TraceEvent::Submission {
                    time: self.now,
                    node: to,
                    batch_id,
                    accepted,
                    reason,
                });
                self.dispatch(to, outputs);
            }
            EventPayload::Timer { node, token } => {
                let outputs = self.nodes[node].handle_timer(token, self.now);
                self.dispatch(node, outputs);
            }
        }
        true
    }

    /// The run's record so far, with final per-node summaries.
    pub fn trace(&self) -> Trace {
        Trace {
            seed: self.config.seed,
            ended_at: self.now,
            final_heights: self.nodes.iter().map(Node::committed_height).collect(),
            final_roots: self.nodes.iter().map(Node::state_root).collect(),
            final_views: self.nodes.iter().map(Node::view).collect(),
            events: self.events.clone(),
        }
    }

    fn push(&mut self, at: u64, payload: EventPayload) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Reverse(Scheduled { at, seq, payload }));
    }

    fn dispatch(&mut self, from: usize, outputs: Vec<Output>) {
        for output in outputs {
            match output {
                Output::Send { to, message } => self.route(from, to, message),
                Output::Broadcast { message } => {
                    for to in 0..self.config.n {
                        if to != from {
                            self.route(from, to, message.clone());
                        }
                    }
                }
                Output::ArmTimer { delay, token } => {
                    self.push(self.now + delay, EventPayload::Timer { node: from, token });
                }
                Output::Committed {
                    height,
                    digest,
                    state_root,
                } => self.events.push(TraceEvent::Commit {
                    time: self.now,
                    node: from,
                    height,
                    digest,
                    state_root,
                }),
                Output::EnteredView { view } => self.events.push(TraceEvent::ViewEntered {
                    time: self.now,
                    node: from,
                    view,
                }),
            }
        }
    }

    /// Applies the sender's fault wrapper, then samples the link.
    fn route(&mut self, from: usize, to: usize, message: ConsensusMessage) {
        let mut extra_delay = 0;
        let message = match self.faults.get(&from).copied() {
            Some(FaultKind::Mute { from: start }) if self.now >= start => return,
            Some(FaultKind::Mute { .. }) | None => message,
            Some(FaultKind::Delayed { extra }) => {
                extra_delay = extra;
                message
            }
            Some(FaultKind::SignatureCorrupting) => corrupt_signature(message),
            Some(FaultKind::Equivocator) => self.equivocate(from, to, message),
        };
        let dropped = self.config.link.drop_rate > 0.0
            && self.rng.gen_bool(self.config.link.drop_rate);
        let jitter = if self.config.link.jitter > 0 {
            self.rng.gen_range(0..=self.config.link.jitter)
        } else {
            0
        };
        self.events.push(TraceEvent::Message {
            time: self.now,
            from,
            to,
            kind: message.kind.label().to_string(),
            view: message.view,
            sequence: message.sequence,
            delivered: !dropped,
        });
        if !dropped {
            let at = self.now + self.config.link.base_delay + jitter + extra_delay;
            self.push(at, EventPayload::Deliver { to, message });
        }
    }

    /// An equivocating node sends its real proposal to the lower half of
    /// its peers and a conflicting one — same slot, empty block — to the
    /// upper half, splitting the prepare vote so neither side can quorum.
    fn equivocate(&self, from: usize, to: usize, message: ConsensusMessage) -> ConsensusMessage {
        let MessageKind::PrePrepare { block } = &message.kind else {
            return message;
        };
        if to < self.config.n.div_ceil(2) {
            return message;
        }
        let head = self.nodes[from].chain().last().expect("genesis present");
        let alternative = Block::build(
            &self.node_keys[from],
            block.height,
            block.previous_digest.clone(),
            Vec::new(),
            head.block.state_root.clone(),
            Value::Null,
        )
        .expect("build conflicting block");
        ConsensusMessage::build(
            &self.node_keys[from],
            message.view,
            message.sequence,
            MessageKind::PrePrepare { block: alternative },
            from,
        )
        .expect("sign conflicting proposal")
    }
}

fn corrupt_signature(mut message: ConsensusMessage) -> ConsensusMessage {
    let flipped = if message.signature.starts_with('0') {
        "f"
    } else {
        "0"
    };
    message.signature.replace_range(0..1, flipped);
    message
}

/// Builds the network, schedules the workload, runs to quiescence (or
/// `max_time`), and returns the trace.
pub fn run_simulation(
    config: &NetworkConfig,
    genesis_settings: Value,
    workload: &[WorkloadItem],
) -> Result<Trace, ConsensusError> {
    let mut sim = Simulation::new(config.clone(), genesis_settings)?;
    for item in workload {
        sim.submit_at(item.at, item.node, item.batch.clone());
    }
    sim.run();
    Ok(sim.trace())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn undersized_networks_are_rejected() {
        let config = NetworkConfig::honest(3, 1, 1);
        let err = Simulation::new(config, serde_json::json!({"roles": {}}));
        assert!(matches!(err, Err(ConsensusError::InvalidConfig(_))));
    }

    #[test]
    fn event_order_is_time_then_insertion() {
        let mut heap = BinaryHeap::new();
        for (at, seq) in [(5u64, 0u64), (3, 1), (3, 2), (9, 3)] {
            heap.push(Reverse(Scheduled {
                at,
                seq,
                payload: EventPayload::Timer { node: 0, token: 0 },
            }));
        }
        let order: Vec<(u64, u64)> = std::iter::from_fn(|| heap.pop())
            .map(|Reverse(s)| (s.at, s.seq))
            .collect();
        assert_eq!(order, vec![(3, 1), (3, 2), (5, 0), (9, 3)]);
    }
}
