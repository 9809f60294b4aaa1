//! Signed protocol messages exchanged between validators.

use ledger_state::{
    canonical_json_bytes, sign_bytes, verify_bytes, Batch, Block, LedgerError, SigningKey,
};
use serde::{Deserialize, Serialize};

/// Payload variants. The first five are the agreement protocol itself; the
/// rest are gossip and catch-up traffic that keeps lossy networks live.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MessageKind {
    /// Primary's proposal: a full block for (view, sequence).
    PrePrepare { block: Block },
    /// Vote that the sender accepted the proposal with this digest.
    Prepare { digest: String },
    /// Vote that the sender saw a prepare quorum for this digest.
    Commit { digest: String },
    /// Call to move to view `view` (the message's view field is the target).
    /// Carries the sender's progress and, if it had prepared an uncommitted
    /// block, the certificate that the new primary must honor.
    ViewChange {
        committed_height: u64,
        prepared: Option<PreparedCertificate>,
    },
    /// New primary's proof that a view-change quorum exists, plus its first
    /// proposal in the new view (embedded so no reordering can lose it).
    NewView {
        proofs: Vec<ConsensusMessage>,
        pre_prepare: Option<Box<ConsensusMessage>>,
    },
    /// Periodic progress beacon; peers answer with missing blocks.
    StatusPing { committed_height: u64 },
    /// Explicit request for blocks starting at `from_height`.
    BlockRequest { from_height: u64 },
    /// Committed blocks with their commit certificates, for catch-up.
    BlockResponse { blocks: Vec<CertifiedBlock> },
    /// Relays a client batch so every validator holds the pending set.
    BatchGossip { batch: Batch },
}

impl MessageKind {
    /// Stable label used in traces.
    pub fn label(&self) -> &'static str {
        match self {
            MessageKind::PrePrepare { .. } => "pre_prepare",
            MessageKind::Prepare { .. } => "prepare",
            MessageKind::Commit { .. } => "commit",
            MessageKind::ViewChange { .. } => "view_change",
            MessageKind::NewView { .. } => "new_view",
            MessageKind::StatusPing { .. } => "status_ping",
            MessageKind::BlockRequest { .. } => "block_request",
            MessageKind::BlockResponse { .. } => "block_response",
            MessageKind::BatchGossip { .. } => "batch_gossip",
        }
    }
}

/// A protocol message, signed over its canonical content by the sender.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusMessage {
    pub view: u64,
    pub sequence: u64,
    pub kind: MessageKind,
    /// Validator index of the sender.
    pub sender: usize,
    pub signature: String,
}

#[derive(Serialize)]
struct SignableMessage<'a> {
    view: u64,
    sequence: u64,
    kind: &'a MessageKind,
    sender: usize,
}

impl ConsensusMessage {
    pub fn build(
        key: &SigningKey,
        view: u64,
        sequence: u64,
        kind: MessageKind,
        sender: usize,
    ) -> Result<Self, LedgerError> {
        let mut message = ConsensusMessage {
            view,
            sequence,
            kind,
            sender,
            signature: String::new(),
        };
        message.signature = sign_bytes(key, &message.signable_bytes()?);
        Ok(message)
    }

    fn signable_bytes(&self) -> Result<Vec<u8>, LedgerError> {
        canonical_json_bytes(&SignableMessage {
            view: self.view,
            sequence: self.sequence,
            kind: &self.kind,
            sender: self.sender,
        })
    }

    /// Checks the signature against the claimed sender's public key.
    pub fn verify(&self, sender_public_key: &str) -> bool {
        match self.signable_bytes() {
            Ok(bytes) => {
                verify_bytes(sender_public_key, &bytes, &self.signature).unwrap_or(false)
            }
            Err(_) => false,
        }
    }
}

/// Proof that 2f+1 validators prepared `digest` at (view, sequence); the
/// block rides along so a new primary can re-propose it verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparedCertificate {
    pub view: u64,
    pub sequence: u64,
    pub digest: String,
    pub block: Block,
    pub prepares: Vec<ConsensusMessage>,
}

/// A committed block together with the 2f+1 commit votes that sealed it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifiedBlock {
    pub block: Block,
    pub commits: Vec<ConsensusMessage>,
}

/// True when `votes` holds at least `quorum` distinct, correctly signed
/// messages from known validators matching `expect`.
pub fn quorum_holds(
    votes: &[ConsensusMessage],
    public_keys: &[String],
    quorum: usize,
    mut expect: impl FnMut(&ConsensusMessage) -> bool,
) -> bool {
    let mut seen = std::collections::BTreeSet::new();
    for vote in votes {
        if vote.sender >= public_keys.len() || !expect(vote) {
            continue;
        }
        if !vote.verify(&public_keys[vote.sender]) {
            continue;
        }
        seen.insert(vote.sender);
    }
    seen.len() >= quorum
}

impl PreparedCertificate {
    /// Checks internal consistency: the block matches the digest and the
    /// prepare votes form a quorum for it.
    pub fn verify(&self, public_keys: &[String], quorum: usize) -> bool {
        let block_digest = match self.block.digest() {
            Ok(digest) => digest,
            Err(_) => return false,
        };
        if block_digest != self.digest || self.block.height != self.sequence {
            return false;
        }
        quorum_holds(&self.prepares, public_keys, quorum, |vote| {
            vote.view == self.view
                && vote.sequence == self.sequence
                && matches!(&vote.kind, MessageKind::Prepare { digest } if *digest == self.digest)
        })
    }
}

impl CertifiedBlock {
    /// Checks that the commit votes form a quorum for this block's digest.
    pub fn verify(&self, public_keys: &[String], quorum: usize) -> bool {
        let digest = match self.block.digest() {
            Ok(digest) => digest,
            Err(_) => return false,
        };
        quorum_holds(&self.commits, public_keys, quorum, |vote| {
            vote.sequence == self.block.height
                && matches!(&vote.kind, MessageKind::Commit { digest: d } if *d == digest)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ledger_state::{keypair_from_seed, public_key_hex};

    fn keys(n: usize) -> (Vec<SigningKey>, Vec<String>) {
        let signing: Vec<SigningKey> = (0..n)
            .map(|i| keypair_from_seed([i as u8 + 1; 32]))
            .collect();
        let public = signing.iter().map(public_key_hex).collect();
        (signing, public)
    }

    #[test]
    fn signatures_bind_sender_and_content() {
        let (signing, public) = keys(2);
        let msg = ConsensusMessage::build(
            &signing[0],
            3,
            7,
            MessageKind::Prepare { digest: "d".into() },
            0,
        )
        .unwrap();
        assert!(msg.verify(&public[0]));
        assert!(!msg.verify(&public[1]));

        let mut tampered = msg.clone();
        tampered.view = 4;
        assert!(!tampered.verify(&public[0]));

        let mut corrupted = msg;
        corrupted.signature.replace_range(0..1, "f");
        assert!(!corrupted.verify(&public[0]) || corrupted.signature.starts_with('f'));
    }

    #[test]
    fn quorum_counts_distinct_valid_senders_only() {
        let (signing, public) = keys(4);
        let vote = |i: usize| {
            ConsensusMessage::build(
                &signing[i],
                0,
                1,
                MessageKind::Commit { digest: "d".into() },
                i,
            )
            .unwrap()
        };
        let expect = |m: &ConsensusMessage| {
            matches!(&m.kind, MessageKind::Commit { digest } if digest == "d")
        };

        // Two votes, one duplicated: still two distinct senders.
        let votes = vec![vote(0), vote(1), vote(1)];
        assert!(!quorum_holds(&votes, &public, 3, expect));

        let votes = vec![vote(0), vote(1), vote(2)];
        assert!(quorum_holds(&votes, &public, 3, expect));

        // A forged vote (claims sender 3, signed by 0) does not count.
        let mut forged = vote(0);
        forged.sender = 3;
        let votes = vec![vote(0), vote(1), forged];
        assert!(!quorum_holds(&votes, &public, 3, expect));
    }
}
