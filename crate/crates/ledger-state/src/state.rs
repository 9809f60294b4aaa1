//! The flat, content-addressed global state.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha512};

use crate::address::{Address, Category};
use crate::canonical::sha512_hex;
use crate::error::LedgerError;

/// Map from address to canonical-JSON payload text.
///
/// The state root is the SHA-512 over all `(address, payload digest)` pairs
/// in address order, so two states with the same contents report the same
/// root no matter how they were built.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GlobalState {
    entries: BTreeMap<Address, String>,
}

impl GlobalState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Last committed payload at `address`, if any.
    pub fn get(&self, address: &Address) -> Option<&str> {
        self.entries.get(address).map(String::as_str)
    }

    /// Parses the payload at `address` as JSON.
    pub fn get_json(&self, address: &Address) -> Result<Option<serde_json::Value>, LedgerError> {
        match self.entries.get(address) {
            None => Ok(None),
            Some(text) => serde_json::from_str(text)
                .map(Some)
                .map_err(|e| LedgerError::MalformedPayload(e.to_string())),
        }
    }

    /// Stores `payload` at `address` and returns the new state root.
    pub fn set(&mut self, address: Address, payload: String) -> String {
        self.entries.insert(address, payload);
        self.state_root()
    }

    /// All entries whose address begins with `prefix`, in address order.
    pub fn entries_with_prefix(&self, prefix: &str) -> Vec<(&Address, &str)> {
        self.entries
            .iter()
            .filter(|(address, _)| address.as_str().starts_with(prefix))
            .map(|(address, payload)| (address, payload.as_str()))
            .collect()
    }

    /// All entries in one category's namespace.
    pub fn entries_in_category(&self, category: Category) -> Vec<(&Address, &str)> {
        self.entries_with_prefix(&category.prefix())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Digest over sorted `(address, payload digest)` pairs.
    pub fn state_root(&self) -> String {
        let mut hasher = Sha512::new();
        for (address, payload) in &self.entries {
            hasher.update(address.as_str().as_bytes());
            hasher.update(sha512_hex(payload.as_bytes()).as_bytes());
        }
        hex::encode(hasher.finalize())
    }
}
