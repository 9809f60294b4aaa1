//! The validator: a deterministic PBFT-style state machine.
//!
//! A node reacts to exactly three stimuli — a client submission, a signed
//! peer message, a timer it previously armed — and returns the messages,
//! timers, and commit notifications it produces in response. All randomness
//! (delays, drops) lives in the transport, so a node's behavior is a pure
//! function of its stimulus order.
//!
//! Protocol sketch: the primary of view v (node v mod n) proposes pending
//! batches one block at a time, ordered by arrival time with batch-id
//! tie-breaks. Replicas validate a proposal by executing it, then vote in
//! two rounds (prepare, commit); each round carries with 2f+1 distinct
//! votes. Lack of progress, proof that the primary equivocated, or f+1
//! conflicting prepare votes trigger a view change; 2f+1 view-change calls
//! let the next primary install the new view, re-proposing any block that
//! might already have committed. Periodic retransmission plus block
//! transfer under commit certificates keep lossy networks live and lagging
//! nodes in sync.

use std::collections::{BTreeMap, BTreeSet};

use ledger_state::{Batch, Block, GlobalState, SigningKey};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use txn_processor::{ExecutionContext, Executor};

use crate::error::ConsensusError;
use crate::message::{
    quorum_holds, CertifiedBlock, ConsensusMessage, MessageKind, PreparedCertificate,
};

/// Status ticks a node keeps broadcasting after its own work is done, so
/// lagging peers can still discover the blocks they missed.
const LINGER_ROUNDS: u32 = 6;
/// Maximum blocks served in one catch-up response.
const CATCHUP_CHUNK: usize = 16;
/// How far ahead of the committed height early votes are buffered.
const EARLY_WINDOW: u64 = 8;

/// Static per-node view of the network.
#[derive(Debug, Clone)]
pub struct NodeConfig {
    pub id: usize,
    pub n: usize,
    pub f: usize,
    /// Validator public keys, indexed by node id.
    pub public_keys: Vec<String>,
    /// Ticks without progress before calling a view change.
    pub progress_timeout: u64,
    /// Ticks between retransmission rounds while work is outstanding.
    pub retransmit_interval: u64,
}

impl NodeConfig {
    /// Votes required to carry a prepare, commit, or view-change round.
    pub fn quorum(&self) -> usize {
        2 * self.f + 1
    }

    /// The proposer for a view: round-robin over validator ids.
    pub fn primary_of(&self, view: u64) -> usize {
        (view % self.n as u64) as usize
    }
}

/// What a node wants the outside world to do after handling a stimulus.
#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    /// Deliver `message` to one peer.
    Send { to: usize, message: ConsensusMessage },
    /// Deliver `message` to every other validator.
    Broadcast { message: ConsensusMessage },
    /// Call `handle_timer(token)` after `delay` ticks.
    ArmTimer { delay: u64, token: u64 },
    /// A block was appended to the local chain.
    Committed {
        height: u64,
        digest: String,
        state_root: String,
    },
    /// The node moved to a new view.
    EnteredView { view: u64 },
}

/// Node-local fate of a submitted batch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BatchStatus {
    /// Accepted, not yet in a committed block.
    Pending,
    /// In the committed block at `height` and executed successfully.
    Committed { height: u64 },
    /// In a committed block, but execution rejected it for `reason`.
    Invalid { reason: String },
    /// Never seen by this node.
    Unknown,
}

#[derive(Debug, Clone)]
struct PendingBatch {
    arrived: u64,
    id: String,
    batch: Batch,
}

/// The consensus instance currently being voted on.
#[derive(Debug, Clone)]
struct InFlight {
    view: u64,
    sequence: u64,
    digest: String,
    block: Block,
    post_state: GlobalState,
    post_receipts: Vec<(String, BatchStatus)>,
    prepares: BTreeMap<usize, ConsensusMessage>,
    commits: BTreeMap<usize, ConsensusMessage>,
    /// Senders whose prepare votes named a different digest — evidence of
    /// an equivocating primary once f+1 of them disagree with us.
    conflicting: BTreeSet<usize>,
    sent_commit: bool,
}

/// A single validator.
pub struct Node {
    cfg: NodeConfig,
    key: SigningKey,
    executor: Executor,
    view: u64,
    chain: Vec<CertifiedBlock>,
    state: GlobalState,
    pending: Vec<PendingBatch>,
    receipts: BTreeMap<String, BatchStatus>,
    in_flight: Option<InFlight>,
    /// Kept across view changes until its sequence commits: proof we once
    /// prepared a block that the next primary must honor.
    prepared_cert: Option<PreparedCertificate>,
    view_change_target: Option<u64>,
    view_changes: BTreeMap<u64, BTreeMap<usize, ConsensusMessage>>,
    /// Prepare/commit votes that arrived before their proposal did.
    early_votes: BTreeMap<(u64, u64), Vec<ConsensusMessage>>,
    /// First digest seen per (view, sequence), for equivocation detection.
    preprepare_digests: BTreeMap<(u64, u64), String>,
    /// Re-broadcast while primary so replicas that missed the view change
    /// can still join.
    last_new_view: Option<ConsensusMessage>,
    progress_token: Option<u64>,
    tick_token: Option<u64>,
    next_token: u64,
    linger: u32,
    /// Messages discarded for bad signatures or unknown senders.
    pub dropped_invalid: u64,
}

impl Node {
    pub fn new(cfg: NodeConfig, key: SigningKey, genesis: Block) -> Result<Self, ConsensusError> {
        genesis.verify(None)?;
        if genesis.height != 0 {
            return Err(ConsensusError::InvalidConfig(
                "genesis block must have height 0".into(),
            ));
        }
        let executor = Executor::from_genesis_settings(&genesis.settings)?;
        let state = GlobalState::new();
        if genesis.state_root != state.state_root() {
            return Err(ConsensusError::InvalidConfig(
                "genesis state root does not match empty state".into(),
            ));
        }
        Ok(Node {
            cfg,
            key,
            executor,
            view: 0,
            chain: vec![CertifiedBlock {
                block: genesis,
                commits: Vec::new(),
            }],
            state,
            pending: Vec::new(),
            receipts: BTreeMap::new(),
            in_flight: None,
            prepared_cert: None,
            view_change_target: None,
            view_changes: BTreeMap::new(),
            early_votes: BTreeMap::new(),
            preprepare_digests: BTreeMap::new(),
            last_new_view: None,
            progress_token: None,
            tick_token: None,
            next_token: 0,
            linger: 0,
            dropped_invalid: 0,
        })
    }

    pub fn id(&self) -> usize {
        self.cfg.id
    }

    pub fn view(&self) -> u64 {
        self.view
    }

    pub fn chain(&self) -> &[CertifiedBlock] {
        &self.chain
    }

    pub fn state(&self) -> &GlobalState {
        &self.state
    }

    pub fn state_root(&self) -> String {
        self.state.state_root()
    }

    pub fn committed_height(&self) -> u64 {
        self.head_block().height
    }

    pub fn head_digest(&self) -> String {
        self.head_block().digest().expect("chain head digest")
    }

    /// Node-local status of a batch by id.
    pub fn status(&self, batch_id: &str) -> BatchStatus {
        self.receipts
            .get(batch_id)
            .cloned()
            .unwrap_or(BatchStatus::Unknown)
    }

    pub fn pending_count(&self) -> usize {
        self.pending.len()
    }

    /// Accepts a client batch: verified at the door, remembered as pending,
    /// gossiped to peers. Re-submitting a known batch is a no-op that
    /// returns the same id.
    pub fn submit_batch(
        &mut self,
        batch: Batch,
        now: u64,
    ) -> (Result<String, String>, Vec<Output>) {
        let mut out = Vec::new();
        let id = match batch.id() {
            Ok(id) => id,
            Err(e) => return (Err(e.to_string()), out),
        };
        if let Err(e) = batch.verify() {
            return (Err(e.to_string()), out);
        }
        if !self.receipts.contains_key(&id) {
            self.receipts.insert(id.clone(), BatchStatus::Pending);
            self.pending.push(PendingBatch {
                arrived: now,
                id: id.clone(),
                batch: batch.clone(),
            });
            let gossip = self.make_message(
                self.view,
                self.committed_height(),
                MessageKind::BatchGossip { batch },
            );
            out.push(Output::Broadcast { message: gossip });
            self.ensure_timers(&mut out);
            self.try_propose(now, &mut out);
        }
        (Ok(id), out)
    }

    /// Handles one signed peer message. Unknown senders and bad signatures
    /// are dropped and counted, never acted on.
    pub fn handle_message(&mut self, message: ConsensusMessage, now: u64) -> Vec<Output> {
        let mut out = Vec::new();
        if message.sender >= self.cfg.n || message.sender == self.cfg.id {
            self.dropped_invalid += 1;
            return out;
        }
        if !message.verify(&self.cfg.public_keys[message.sender]) {
            self.dropped_invalid += 1;
            return out;
        }
        match message.kind.clone() {
            MessageKind::PrePrepare { block } => {
                self.handle_preprepare(&message, &block, now, &mut out)
            }
            MessageKind::Prepare { digest } => {
                self.handle_prepare(&message, &digest, now, &mut out)
            }
            MessageKind::Commit { digest } => self.handle_commit(&message, &digest, now, &mut out),
            MessageKind::ViewChange { .. } => self.handle_view_change(&message, now, &mut out),
            MessageKind::NewView {
                proofs,
                pre_prepare,
            } => self.handle_new_view(&message, &proofs, pre_prepare.map(|b| *b), now, &mut out),
            MessageKind::StatusPing { committed_height } => {
                self.handle_status(message.sender, committed_height, &mut out)
            }
            MessageKind::BlockRequest { from_height } => {
                self.handle_block_request(message.sender, from_height, &mut out)
            }
            MessageKind::BlockResponse { blocks } => {
                self.handle_block_response(blocks, now, &mut out)
            }
            MessageKind::BatchGossip { batch } => {
                self.handle_batch_gossip(batch, now, &mut out)
            }
        }
        out
    }

    /// Handles a timer armed earlier. Stale tokens are ignored.
    pub fn handle_timer(&mut self, token: u64, now: u64) -> Vec<Output> {
        let mut out = Vec::new();
        if Some(token) == self.progress_token {
            self.progress_token = None;
            if self.wants_progress() {
                let target = self.view_change_target.map_or(self.view + 1, |t| t + 1);
                self.start_view_change(target, now, &mut out);
                self.ensure_timers(&mut out);
            }
        } else if Some(token) == self.tick_token {
            self.tick_token = None;
            self.retransmit(now, &mut out);
        }
        out
    }

    // ------------------------------------------------------------------
    // Proposal and voting
    // ------------------------------------------------------------------

    fn handle_preprepare(
        &mut self,
        message: &ConsensusMessage,
        block: &Block,
        now: u64,
        out: &mut Vec<Output>,
    ) {
        if self.view_change_target.is_some() {
            return;
        }
        if message.view != self.view || message.sender != self.cfg.primary_of(self.view) {
            return;
        }
        let sequence = message.sequence;
        if block.height != sequence {
            return;
        }
        let Ok(digest) = block.digest() else { return };
        match self.preprepare_digests.get(&(message.view, sequence)) {
            Some(seen) if *seen != digest => {
                // Two proposals for one slot, both from the primary:
                // proven equivocation.
                let target = self.view + 1;
                self.start_view_change(target, now, out);
                return;
            }
            Some(_) => {}
            None => {
                self.preprepare_digests
                    .insert((message.view, sequence), digest.clone());
            }
        }
        let committed = self.committed_height();
        if sequence <= committed {
            return;
        }
        if sequence > committed + 1 {
            // The primary is ahead of us; fetch what we missed.
            let request = self.make_message(
                self.view,
                committed + 1,
                MessageKind::BlockRequest {
                    from_height: committed + 1,
                },
            );
            out.push(Output::Send {
                to: message.sender,
                message: request,
            });
            self.mark_behind(out);
            return;
        }
        if let Some(inf) = &self.in_flight {
            if inf.sequence == sequence && inf.digest == digest {
                // Retransmitted proposal: re-affirm our vote for peers that
                // missed it.
                let prepare = self.make_message(
                    message.view,
                    sequence,
                    MessageKind::Prepare {
                        digest: digest.clone(),
                    },
                );
                out.push(Output::Broadcast { message: prepare });
            }
            return;
        }
        let Ok((post_state, post_receipts)) = self.execute_block(block) else {
            // A proposal we cannot reproduce gets no vote; the progress
            // timer deals with the primary.
            return;
        };
        let prepare = self.make_message(
            message.view,
            sequence,
            MessageKind::Prepare {
                digest: digest.clone(),
            },
        );
        let mut prepares = BTreeMap::new();
        prepares.insert(self.cfg.id, prepare.clone());
        self.in_flight = Some(InFlight {
            view: message.view,
            sequence,
            digest,
            block: block.clone(),
            post_state,
            post_receipts,
            prepares,
            commits: BTreeMap::new(),
            conflicting: BTreeSet::new(),
            sent_commit: false,
        });
        out.push(Output::Broadcast { message: prepare });
        self.ensure_timers(out);
        if let Some(votes) = self.early_votes.remove(&(message.view, sequence)) {
            for vote in votes {
                self.dispatch_vote(vote, now, out);
            }
        }
        self.check_thresholds(now, out);
    }

    fn handle_prepare(
        &mut self,
        message: &ConsensusMessage,
        digest: &str,
        now: u64,
        out: &mut Vec<Output>,
    ) {
        let matches_instance = self
            .in_flight
            .as_ref()
            .is_some_and(|inf| inf.view == message.view && inf.sequence == message.sequence);
        if !matches_instance {
            self.buffer_early(message);
            return;
        }
        let same_digest = self.in_flight.as_ref().unwrap().digest == digest;
        if same_digest {
            self.in_flight
                .as_mut()
                .unwrap()
                .prepares
                .insert(message.sender, message.clone());
            self.check_thresholds(now, out);
        } else {
            let conflicting = {
                let inf = self.in_flight.as_mut().unwrap();
                inf.conflicting.insert(message.sender);
                inf.conflicting.len()
            };
            if conflicting >= self.cfg.f + 1 {
                // At least one honest peer accepted a different block for
                // this slot, so the primary equivocated.
                let target = self.view + 1;
                self.start_view_change(target, now, out);
            }
        }
    }

    fn handle_commit(
        &mut self,
        message: &ConsensusMessage,
        digest: &str,
        now: u64,
        out: &mut Vec<Output>,
    ) {
        let matches_instance = self.in_flight.as_ref().is_some_and(|inf| {
            inf.view == message.view && inf.sequence == message.sequence && inf.digest == digest
        });
        if !matches_instance {
            self.buffer_early(message);
            return;
        }
        self.in_flight
            .as_mut()
            .unwrap()
            .commits
            .insert(message.sender, message.clone());
        self.check_thresholds(now, out);
    }

    /// Advances the in-flight instance through its thresholds: a prepare
    /// quorum sends our commit vote, a commit quorum seals the block.
    fn check_thresholds(&mut self, now: u64, out: &mut Vec<Output>) {
        let quorum = self.cfg.quorum();
        let wants_commit_vote = match &self.in_flight {
            Some(inf) => !inf.sent_commit && inf.prepares.len() >= quorum,
            None => return,
        };
        if wants_commit_vote {
            let (view, sequence, digest, block, prepares) = {
                let inf = self.in_flight.as_ref().unwrap();
                (
                    inf.view,
                    inf.sequence,
                    inf.digest.clone(),
                    inf.block.clone(),
                    inf.prepares.values().cloned().collect::<Vec<_>>(),
                )
            };
            let commit = self.make_message(
                view,
                sequence,
                MessageKind::Commit {
                    digest: digest.clone(),
                },
            );
            self.prepared_cert = Some(PreparedCertificate {
                view,
                sequence,
                digest,
                block,
                prepares,
            });
            let inf = self.in_flight.as_mut().unwrap();
            inf.sent_commit = true;
            inf.commits.insert(self.cfg.id, commit.clone());
            out.push(Output::Broadcast { message: commit });
        }
        let sealed = self
            .in_flight
            .as_ref()
            .is_some_and(|inf| inf.commits.len() >= quorum);
        if sealed {
            let inf = self.in_flight.take().unwrap();
            let certified = CertifiedBlock {
                block: inf.block,
                commits: inf.commits.into_values().collect(),
            };
            self.install_block(certified, inf.post_state, inf.post_receipts, now, out);
        }
    }

    /// Proposes the oldest pending batch if this node is the idle primary.
    fn try_propose(&mut self, now: u64, out: &mut Vec<Output>) {
        if self.in_flight.is_some() || self.view_change_target.is_some() {
            return;
        }
        if self.cfg.primary_of(self.view) != self.cfg.id || self.pending.is_empty() {
            return;
        }
        let Some(block) = self.next_proposal() else {
            return;
        };
        let proposal = self.make_message(
            self.view,
            block.height,
            MessageKind::PrePrepare {
                block: block.clone(),
            },
        );
        out.push(Output::Broadcast {
            message: proposal.clone(),
        });
        self.handle_preprepare(&proposal, &block, now, out);
    }

    /// Builds a one-batch block from the front of the queue: arrival order,
    /// batch-id tie-break.
    fn next_proposal(&mut self) -> Option<Block> {
        let choice = self
            .pending
            .iter()
            .min_by(|a, b| (a.arrived, &a.id).cmp(&(b.arrived, &b.id)))?;
        let batch = choice.batch.clone();
        let head = self.head_block();
        let height = head.height + 1;
        let previous = head.digest().ok()?;
        let mut scratch = self.state.clone();
        // A batch that fails execution still gets ordered; the block then
        // carries the unchanged state root and every replica derives the
        // same rejection receipt.
        let _ = self
            .executor
            .apply_batch(&mut scratch, &batch, &ExecutionContext { height });
        Block::build(
            &self.key,
            height,
            previous,
            vec![batch],
            scratch.state_root(),
            Value::Null,
        )
        .ok()
    }

    /// Validates and executes a proposed block against the local chain
    /// head, producing the post-state and per-batch receipts.
    fn execute_block(
        &self,
        block: &Block,
    ) -> Result<(GlobalState, Vec<(String, BatchStatus)>), ConsensusError> {
        if !block.settings.is_null() {
            return Err(ConsensusError::InvalidConfig(
                "settings outside genesis".into(),
            ));
        }
        block.verify(Some(self.head_block()))?;
        let mut scratch = self.state.clone();
        let ctx = ExecutionContext {
            height: block.height,
        };
        let mut receipts = Vec::new();
        for batch in &block.batches {
            let id = batch.id()?;
            match self.executor.apply_batch(&mut scratch, batch, &ctx) {
                Ok(()) => receipts.push((
                    id,
                    BatchStatus::Committed {
                        height: block.height,
                    },
                )),
                Err(e) => receipts.push((
                    id,
                    BatchStatus::Invalid { reason: e.reason() },
                )),
            }
        }
        if scratch.state_root() != block.state_root {
            return Err(ConsensusError::InvalidConfig(
                "proposed state root does not match execution".into(),
            ));
        }
        Ok((scratch, receipts))
    }

    /// Appends a sealed block: adopts its post-state, files receipts,
    /// prunes bookkeeping, and moves on to the next proposal if primary.
    fn install_block(
        &mut self,
        certified: CertifiedBlock,
        post_state: GlobalState,
        post_receipts: Vec<(String, BatchStatus)>,
        now: u64,
        out: &mut Vec<Output>,
    ) {
        let height = certified.block.height;
        let digest = certified
            .block
            .digest()
            .expect("sealed block digest");
        self.state = post_state;
        for (id, status) in post_receipts {
            self.receipts.insert(id, status);
        }
        let receipts = &self.receipts;
        self.pending
            .retain(|p| matches!(receipts.get(&p.id), Some(BatchStatus::Pending) | None));
        self.chain.push(certified);
        if self
            .prepared_cert
            .as_ref()
            .is_some_and(|c| c.sequence <= height)
        {
            self.prepared_cert = None;
        }
        if self
            .in_flight
            .as_ref()
            .is_some_and(|inf| inf.sequence <= height)
        {
            self.in_flight = None;
        }
        self.preprepare_digests.retain(|(_, seq), _| *seq > height);
        self.early_votes.retain(|(_, seq), _| *seq > height);
        let view = self.view;
        self.view_changes.retain(|v, _| *v > view);
        self.view_change_target = None;
        self.linger = LINGER_ROUNDS;
        self.progress_token = None; // fresh progress window after progress
        out.push(Output::Committed {
            height,
            digest,
            state_root: self.state.state_root(),
        });
        self.ensure_timers(out);
        self.try_propose(now, out);
    }

    // ------------------------------------------------------------------
    // View changes
    // ------------------------------------------------------------------

    fn start_view_change(&mut self, target: u64, now: u64, out: &mut Vec<Output>) {
        if target <= self.view {
            return;
        }
        if self.view_change_target.is_some_and(|t| target <= t) {
            return;
        }
        self.view_change_target = Some(target);
        self.in_flight = None;
        let message = self.make_message(
            target,
            self.committed_height() + 1,
            MessageKind::ViewChange {
                committed_height: self.committed_height(),
                prepared: self.prepared_cert.clone(),
            },
        );
        self.view_changes
            .entry(target)
            .or_default()
            .insert(self.cfg.id, message.clone());
        out.push(Output::Broadcast { message });
        self.progress_token = None;
        self.ensure_timers(out);
        self.maybe_new_view(target, now, out);
    }

    fn handle_view_change(&mut self, message: &ConsensusMessage, now: u64, out: &mut Vec<Output>) {
        let target = message.view;
        if target <= self.view {
            return;
        }
        self.view_changes
            .entry(target)
            .or_default()
            .insert(message.sender, message.clone());
        // If f+1 peers already want out of this view, at least one of them
        // is honest: join the smallest view they are asking for.
        let mut callers: BTreeMap<usize, u64> = BTreeMap::new();
        for (v, senders) in self.view_changes.range((self.view + 1)..) {
            for sender in senders.keys() {
                callers.entry(*sender).or_insert(*v);
            }
        }
        callers.remove(&self.cfg.id);
        if callers.len() >= self.cfg.f + 1 {
            let smallest = *callers.values().min().expect("nonempty callers");
            if self.view_change_target.is_none_or(|t| t < smallest) {
                self.start_view_change(smallest, now, out);
            }
        }
        self.maybe_new_view(target, now, out);
    }

    /// If this node is the primary of `target` and holds a view-change
    /// quorum for it, installs the view and announces it with a proposal.
    fn maybe_new_view(&mut self, target: u64, now: u64, out: &mut Vec<Output>) {
        if target <= self.view || self.cfg.primary_of(target) != self.cfg.id {
            return;
        }
        let Some(senders) = self.view_changes.get(&target) else {
            return;
        };
        if senders.len() < self.cfg.quorum() {
            return;
        }
        let proofs: Vec<ConsensusMessage> = senders.values().cloned().collect();
        let next_sequence = self.committed_height() + 1;
        // Safety rule: re-propose the highest-view block that anyone
        // prepared for the next slot; it may already have committed
        // somewhere.
        let mut best = self
            .prepared_cert
            .clone()
            .filter(|c| c.sequence == next_sequence);
        for proof in &proofs {
            if let MessageKind::ViewChange {
                prepared: Some(cert),
                ..
            } = &proof.kind
            {
                if cert.sequence == next_sequence
                    && cert.verify(&self.cfg.public_keys, self.cfg.quorum())
                    && best.as_ref().map_or(true, |b| cert.view > b.view)
                {
                    best = Some(cert.clone());
                }
            }
        }
        self.enter_view(target, out);
        let pre_prepare = match best {
            Some(cert) => Some(self.make_message(
                target,
                next_sequence,
                MessageKind::PrePrepare { block: cert.block },
            )),
            None => self.next_proposal().map(|block| {
                self.make_message(target, next_sequence, MessageKind::PrePrepare { block })
            }),
        };
        let announcement = self.make_message(
            target,
            next_sequence,
            MessageKind::NewView {
                proofs,
                pre_prepare: pre_prepare.clone().map(Box::new),
            },
        );
        self.last_new_view = Some(announcement.clone());
        out.push(Output::Broadcast {
            message: announcement,
        });
        if let Some(proposal) = pre_prepare {
            if let MessageKind::PrePrepare { block } = proposal.kind.clone() {
                self.handle_preprepare(&proposal, &block, now, out);
            }
        }
        self.ensure_timers(out);
    }

    fn handle_new_view(
        &mut self,
        message: &ConsensusMessage,
        proofs: &[ConsensusMessage],
        pre_prepare: Option<ConsensusMessage>,
        now: u64,
        out: &mut Vec<Output>,
    ) {
        let target = message.view;
        if target <= self.view || message.sender != self.cfg.primary_of(target) {
            return;
        }
        let proof_quorum = quorum_holds(
            proofs,
            &self.cfg.public_keys,
            self.cfg.quorum(),
            |m| m.view == target && matches!(m.kind, MessageKind::ViewChange { .. }),
        );
        if !proof_quorum {
            return;
        }
        // What the primary is obliged to propose for the next slot, if the
        // proofs show anyone prepared a block there.
        let next_sequence = self.committed_height() + 1;
        let mut required: Option<(u64, String)> = None;
        for proof in proofs {
            if let MessageKind::ViewChange {
                prepared: Some(cert),
                ..
            } = &proof.kind
            {
                if cert.sequence == next_sequence
                    && cert.verify(&self.cfg.public_keys, self.cfg.quorum())
                    && required.as_ref().map_or(true, |(v, _)| cert.view > *v)
                {
                    required = Some((cert.view, cert.digest.clone()));
                }
            }
        }
        self.enter_view(target, out);
        if let Some(proposal) = pre_prepare {
            let honors_required = match (&required, &proposal.kind) {
                (Some((_, digest)), MessageKind::PrePrepare { block })
                    if proposal.sequence == next_sequence =>
                {
                    block.digest().map(|d| d == *digest).unwrap_or(false)
                }
                _ => true,
            };
            let genuine = proposal.sender == message.sender
                && proposal.sender < self.cfg.n
                && proposal.verify(&self.cfg.public_keys[proposal.sender]);
            if honors_required && genuine {
                if let MessageKind::PrePrepare { block } = proposal.kind.clone() {
                    self.handle_preprepare(&proposal, &block, now, out);
                }
            }
        }
    }

    fn enter_view(&mut self, view: u64, out: &mut Vec<Output>) {
        self.view = view;
        self.view_change_target = None;
        self.in_flight = None;
        self.last_new_view = None;
        self.view_changes.retain(|v, _| *v > view);
        self.early_votes.retain(|(v, _), _| *v >= view);
        self.progress_token = None;
        out.push(Output::EnteredView { view });
        self.ensure_timers(out);
    }

    // ------------------------------------------------------------------
    // Gossip and catch-up
    // ------------------------------------------------------------------

    fn handle_batch_gossip(&mut self, batch: Batch, now: u64, out: &mut Vec<Output>) {
        let Ok(id) = batch.id() else {
            self.dropped_invalid += 1;
            return;
        };
        if self.receipts.contains_key(&id) {
            return;
        }
        if batch.verify().is_err() {
            self.dropped_invalid += 1;
            return;
        }
        self.receipts.insert(id.clone(), BatchStatus::Pending);
        self.pending.push(PendingBatch {
            arrived: now,
            id,
            batch,
        });
        self.ensure_timers(out);
        self.try_propose(now, out);
    }

    fn handle_status(&mut self, sender: usize, their_height: u64, out: &mut Vec<Output>) {
        let mine = self.committed_height();
        if their_height < mine {
            self.send_blocks(sender, their_height + 1, out);
        } else if their_height > mine {
            let request = self.make_message(
                self.view,
                mine + 1,
                MessageKind::BlockRequest {
                    from_height: mine + 1,
                },
            );
            out.push(Output::Send {
                to: sender,
                message: request,
            });
            self.mark_behind(out);
        }
    }

    fn handle_block_request(&mut self, sender: usize, from_height: u64, out: &mut Vec<Output>) {
        if from_height <= self.committed_height() {
            self.send_blocks(sender, from_height, out);
        }
    }

    fn send_blocks(&self, to: usize, from_height: u64, out: &mut Vec<Output>) {
        let start = from_height.max(1) as usize;
        if start >= self.chain.len() {
            return;
        }
        let end = (start + CATCHUP_CHUNK).min(self.chain.len());
        let blocks = self.chain[start..end].to_vec();
        let response = self.make_message(
            self.view,
            self.committed_height(),
            MessageKind::BlockResponse { blocks },
        );
        out.push(Output::Send {
            to,
            message: response,
        });
    }

    fn handle_block_response(
        &mut self,
        blocks: Vec<CertifiedBlock>,
        now: u64,
        out: &mut Vec<Output>,
    ) {
        for certified in blocks {
            if !self.try_apply_certified(certified, now, out) {
                break;
            }
        }
    }

    /// Adopts a block sealed elsewhere, given a valid commit certificate.
    /// Also adopts the view its quorum committed in, so a lagging node
    /// rejoins the network's current view.
    fn try_apply_certified(
        &mut self,
        certified: CertifiedBlock,
        now: u64,
        out: &mut Vec<Output>,
    ) -> bool {
        if certified.block.height != self.committed_height() + 1 {
            return false;
        }
        if !certified.verify(&self.cfg.public_keys, self.cfg.quorum()) {
            return false;
        }
        let Ok((post_state, post_receipts)) = self.execute_block(&certified.block) else {
            return false;
        };
        let quorum_view = certified
            .commits
            .iter()
            .filter(|m| {
                m.sender < self.cfg.n && m.verify(&self.cfg.public_keys[m.sender])
            })
            .map(|m| m.view)
            .max();
        if let Some(v) = quorum_view {
            if v > self.view {
                self.enter_view(v, out);
            }
        }
        self.install_block(certified, post_state, post_receipts, now, out);
        true
    }

    // ------------------------------------------------------------------
    // Timers and retransmission
    // ------------------------------------------------------------------

    fn retransmit(&mut self, _now: u64, out: &mut Vec<Output>) {
        if !self.is_active() {
            return;
        }
        let ping = self.make_message(
            self.view,
            self.committed_height(),
            MessageKind::StatusPing {
                committed_height: self.committed_height(),
            },
        );
        out.push(Output::Broadcast { message: ping });
        if self.wants_progress() {
            let inflight = self.in_flight.as_ref().map(|inf| {
                (inf.view, inf.sequence, inf.digest.clone(), inf.sent_commit)
            });
            if let Some((view, sequence, digest, sent_commit)) = inflight {
                let prepare = self.make_message(
                    view,
                    sequence,
                    MessageKind::Prepare {
                        digest: digest.clone(),
                    },
                );
                out.push(Output::Broadcast { message: prepare });
                if sent_commit {
                    let commit =
                        self.make_message(view, sequence, MessageKind::Commit { digest });
                    out.push(Output::Broadcast { message: commit });
                }
            }
            if self.cfg.primary_of(self.view) == self.cfg.id {
                if let Some(announcement) = self.last_new_view.clone() {
                    out.push(Output::Broadcast {
                        message: announcement,
                    });
                } else if let Some(inf) = &self.in_flight {
                    let proposal = self.make_message(
                        inf.view,
                        inf.sequence,
                        MessageKind::PrePrepare {
                            block: inf.block.clone(),
                        },
                    );
                    out.push(Output::Broadcast { message: proposal });
                }
            }
            if let Some(target) = self.view_change_target {
                let call = self.make_message(
                    target,
                    self.committed_height() + 1,
                    MessageKind::ViewChange {
                        committed_height: self.committed_height(),
                        prepared: self.prepared_cert.clone(),
                    },
                );
                out.push(Output::Broadcast { message: call });
            }
            for pending in &self.pending {
                let gossip = self.make_message(
                    self.view,
                    self.committed_height(),
                    MessageKind::BatchGossip {
                        batch: pending.batch.clone(),
                    },
                );
                out.push(Output::Broadcast { message: gossip });
            }
        } else {
            self.linger = self.linger.saturating_sub(1);
        }
        self.ensure_timers(out);
    }

    /// Work is outstanding: something to propose, vote on, or resolve.
    fn wants_progress(&self) -> bool {
        self.in_flight.is_some() || !self.pending.is_empty() || self.view_change_target.is_some()
    }

    /// Active nodes keep their tick timer running; linger keeps a finished
    /// node beaconing briefly so laggards can catch up.
    fn is_active(&self) -> bool {
        self.wants_progress() || self.linger > 0
    }

    fn mark_behind(&mut self, out: &mut Vec<Output>) {
        self.linger = LINGER_ROUNDS;
        self.ensure_timers(out);
    }

    fn ensure_timers(&mut self, out: &mut Vec<Output>) {
        if self.wants_progress() && self.progress_token.is_none() {
            let token = self.fresh_token();
            self.progress_token = Some(token);
            out.push(Output::ArmTimer {
                delay: self.cfg.progress_timeout,
                token,
            });
        }
        if self.is_active() && self.tick_token.is_none() {
            let token = self.fresh_token();
            self.tick_token = Some(token);
            out.push(Output::ArmTimer {
                delay: self.cfg.retransmit_interval,
                token,
            });
        }
    }

    fn fresh_token(&mut self) -> u64 {
        self.next_token += 1;
        self.next_token
    }

    // ------------------------------------------------------------------
    // Small helpers
    // ------------------------------------------------------------------

    fn head_block(&self) -> &Block {
        &self.chain.last().expect("chain holds genesis").block
    }

    fn make_message(&self, view: u64, sequence: u64, kind: MessageKind) -> ConsensusMessage {
        ConsensusMessage::build(&self.key, view, sequence, kind, self.cfg.id)
            .expect("sign consensus message")
    }

    fn buffer_early(&mut self, message: &ConsensusMessage) {
        if message.view < self.view {
            return;
        }
        let committed = self.committed_height();
        if message.sequence <= committed || message.sequence > committed + EARLY_WINDOW {
            return;
        }
        let entry = self
            .early_votes
            .entry((message.view, message.sequence))
            .or_default();
        if entry.len() < 4 * self.cfg.n && !entry.contains(message) {
            entry.push(message.clone());
        }
    }

    fn dispatch_vote(&mut self, vote: ConsensusMessage, now: u64, out: &mut Vec<Output>) {
        match vote.kind.clone() {
            MessageKind::Prepare { digest } => self.handle_prepare(&vote, &digest, now, out),
            MessageKind::Commit { digest } => self.handle_commit(&vote, &digest, now, out),
            _ => {}
        }
    }
}
