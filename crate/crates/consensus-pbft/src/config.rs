//! Network configuration: membership, fault bounds, timing, faults.

use ledger_state::{keypair_from_seed, public_key_hex, LedgerError, SigningKey};
use serde::{Deserialize, Serialize};
use sha2_digest::digest_seed;

use crate::error::ConsensusError;

/// Per-link delay and loss model, sampled from the simulation's seeded RNG.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkModel {
    /// Fixed delivery delay in ticks.
    pub base_delay: u64,
    /// Uniform extra delay in `[0, jitter]` ticks.
    pub jitter: u64,
    /// Probability a message is lost, per link traversal.
    pub drop_rate: f64,
}

impl Default for LinkModel {
    fn default() -> Self {
        LinkModel {
            base_delay: 10,
            jitter: 5,
            drop_rate: 0.0,
        }
    }
}

/// Byzantine behaviors, each a transport-level wrapper over an honest node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FaultKind {
    /// Sends nothing from `from` onward (crash-stop from the outside).
    Mute { from: u64 },
    /// All outbound messages take `extra` additional ticks.
    Delayed { extra: u64 },
    /// Outbound signatures are corrupted; honest receivers drop them.
    SignatureCorrupting,
    /// As primary, sends conflicting blocks to different halves of the
    /// network for the same (view, sequence).
    Equivocator,
}

/// Assignment of one fault to one node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaultSpec {
    pub node: usize,
    #[serde(flatten)]
    pub kind: FaultKind,
}

/// Full network configuration; serializable as canonical JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Validator count.
    pub n: usize,
    /// Maximum Byzantine nodes tolerated; requires `n ≥ 3f + 1`.
    pub f: usize,
    /// Seed for keys, link sampling, and everything else random.
    pub seed: u64,
    pub link: LinkModel,
    /// Ticks of no progress before a node calls for a view change.
    pub progress_timeout: u64,
    /// Ticks between retransmission/status rounds on active nodes.
    pub retransmit_interval: u64,
    /// Hard stop for a simulation run, in ticks.
    pub max_time: u64,
    pub faults: Vec<FaultSpec>,
}

impl NetworkConfig {
    /// A fault-free configuration with sane timing defaults.
    pub fn honest(n: usize, f: usize, seed: u64) -> Self {
        NetworkConfig {
            n,
            f,
            seed,
            link: LinkModel::default(),
            progress_timeout: 400,
            retransmit_interval: 120,
            max_time: 1_000_000,
            faults: Vec::new(),
        }
    }

    pub fn with_faults(mut self, faults: Vec<FaultSpec>) -> Self {
        self.faults = faults;
        self
    }

    /// Rejects configurations outside the `n ≥ 3f + 1` bound or with
    /// out-of-range fault assignments.
    pub fn validate(&self) -> Result<(), ConsensusError> {
        if self.n < 3 * self.f + 1 {
            return Err(ConsensusError::InvalidConfig(format!(
                "n = {} violates n >= 3f + 1 for f = {}",
                self.n, self.f
            )));
        }
        if self.n == 0 {
            return Err(ConsensusError::InvalidConfig("n must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.link.drop_rate) {
            return Err(ConsensusError::InvalidConfig(format!(
                "drop_rate {} outside [0, 1)",
                self.link.drop_rate
            )));
        }
        for fault in &self.faults {
            if fault.node >= self.n {
                return Err(ConsensusError::InvalidConfig(format!(
                    "fault assigned to unknown node {}",
                    fault.node
                )));
            }
        }
        Ok(())
    }

    /// Deterministic signing key for validator `id`.
    pub fn node_key(&self, id: usize) -> SigningKey {
        keypair_from_seed(digest_seed(&format!("validator.{}.{}", self.seed, id)))
    }

    /// Deterministic key that signs the genesis block.
    pub fn genesis_key(&self) -> SigningKey {
        keypair_from_seed(digest_seed(&format!("genesis.{}", self.seed)))
    }

    /// Hex public keys of all validators, indexed by id.
    pub fn public_keys(&self) -> Vec<String> {
        (0..self.n)
            .map(|id| public_key_hex(&self.node_key(id)))
            .collect()
    }

    pub fn to_canonical_json(&self) -> Result<String, LedgerError> {
        ledger_state::canonical_json_string(self)
    }

    pub fn from_json(text: &str) -> Result<Self, ConsensusError> {
        let config: NetworkConfig = serde_json::from_str(text)
            .map_err(|e| ConsensusError::InvalidConfig(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }
}

mod sha2_digest {
    use sha2::{Digest, Sha512};

    /// First 32 bytes of SHA-512 over `label`, as an ed25519 seed.
    pub fn digest_seed(label: &str) -> [u8; 32] {
        let digest = Sha512::digest(label.as_bytes());
        let mut seed = [0u8; 32];
        seed.copy_from_slice(&digest[..32]);
        seed
    }
}
