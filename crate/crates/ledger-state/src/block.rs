//! Blocks: consensus-ordered batch lists with chain linkage.

use serde::{Deserialize, Serialize};

use crate::canonical::{canonical_json_bytes, short_digest};
use crate::error::LedgerError;
use crate::signing::{public_key_hex, sign_bytes, verify_bytes, SigningKey};
use crate::txn::Batch;

/// One block in the chain.
///
/// The block digest — used for linkage and for consensus votes — covers the
/// signable content (everything but the proposer signature), so any two
/// blocks with equal content are the same block regardless of who signed.
/// Height 0 is the genesis block: it carries the network settings (roles,
/// validator keys) in `settings` and has an all-zero previous digest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub height: u64,
    pub previous_digest: String,
    pub batches: Vec<Batch>,
    /// State root after executing this block.
    pub state_root: String,
    /// Network settings; JSON null everywhere except genesis.
    pub settings: serde_json::Value,
    pub proposer_public_key: String,
    pub signature: String,
}

/// Previous-digest value of the genesis block.
pub const GENESIS_PREVIOUS: &str =
    "0000000000000000000000000000000000000000000000000000000000000000";

#[derive(Serialize)]
struct SignableBlock<'a> {
    height: u64,
    previous_digest: &'a str,
    batches: &'a [Batch],
    state_root: &'a str,
    settings: &'a serde_json::Value,
    proposer_public_key: &'a str,
}

impl Block {
    pub fn build(
        key: &SigningKey,
        height: u64,
        previous_digest: String,
        batches: Vec<Batch>,
        state_root: String,
        settings: serde_json::Value,
    ) -> Result<Self, LedgerError> {
        let mut block = Block {
            height,
            previous_digest,
            batches,
            state_root,
            settings,
            proposer_public_key: public_key_hex(key),
            signature: String::new(),
        };
        block.signature = sign_bytes(key, &block.signable_bytes()?);
        Ok(block)
    }

    /// Builds the height-0 block carrying `settings`.
    pub fn genesis(
        key: &SigningKey,
        settings: serde_json::Value,
        state_root: String,
    ) -> Result<Self, LedgerError> {
        Self::build(
            key,
            0,
            GENESIS_PREVIOUS.to_string(),
            Vec::new(),
            state_root,
            settings,
        )
    }

    fn signable_bytes(&self) -> Result<Vec<u8>, LedgerError> {
        canonical_json_bytes(&SignableBlock {
            height: self.height,
            previous_digest: &self.previous_digest,
            batches: &self.batches,
            state_root: &self.state_root,
            settings: &self.settings,
            proposer_public_key: &self.proposer_public_key,
        })
    }

    /// Short digest of the signable content.
    pub fn digest(&self) -> Result<String, LedgerError> {
        Ok(short_digest(&self.signable_bytes()?))
    }

    /// Checks the proposer signature and, given the predecessor, linkage.
    pub fn verify(&self, previous: Option<&Block>) -> Result<(), LedgerError> {
        let ok = verify_bytes(
            &self.proposer_public_key,
            &self.signable_bytes()?,
            &self.signature,
        )?;
        if !ok {
            return Err(LedgerError::InvalidSignature);
        }
        let expected = match previous {
            Some(prev) => {
                if prev.height + 1 != self.height {
                    return Err(LedgerError::BrokenChain {
                        height: self.height,
                        expected: prev.digest()?,
                    });
                }
                prev.digest()?
            }
            None => GENESIS_PREVIOUS.to_string(),
        };
        if self.previous_digest != expected {
            return Err(LedgerError::BrokenChain {
                height: self.height,
                expected,
            });
        }
        Ok(())
    }
}
