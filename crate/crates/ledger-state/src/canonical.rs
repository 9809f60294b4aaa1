//! Canonical JSON serialization and digest helpers.
//!
//! All payloads, headers, and stored records are serialized by first
//! converting to a [`serde_json::Value`] — whose object representation
//! sorts keys — and then rendering compactly with shortest round-trip
//! number formatting. Equal data therefore always produces equal bytes,
//! which is what makes digests comparable across nodes and platforms.

use serde::Serialize;
use sha2::{Digest, Sha512};

use crate::error::LedgerError;

/// Serializes `value` to canonical JSON bytes (sorted keys, compact).
pub fn canonical_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, LedgerError> {
    let value = serde_json::to_value(value)?;
    Ok(serde_json::to_vec(&value)?)
}

/// Serializes `value` to a canonical JSON string.
pub fn canonical_json_string<T: Serialize>(value: &T) -> Result<String, LedgerError> {
    let value = serde_json::to_value(value)?;
    Ok(serde_json::to_string(&value)?)
}

/// Full SHA-512 digest of `bytes`, lowercase hex (128 characters).
pub fn sha512_hex(bytes: &[u8]) -> String {
    hex::encode(Sha512::digest(bytes))
}

/// First 64 hex characters of the SHA-512 of `bytes`; used for identifiers.
pub fn short_digest(bytes: &[u8]) -> String {
    let mut digest = sha512_hex(bytes);
    digest.truncate(64);
    digest
}
