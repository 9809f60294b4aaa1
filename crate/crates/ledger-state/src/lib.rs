//! Content-addressed ledger state and the structures that mutate it.
//!
//! The global state is a flat map from 70-hex-character addresses to
//! canonical-JSON payloads. Addresses are derived from a category namespace
//! plus a key string, so any party can recompute them. Mutations arrive as
//! signed transactions grouped into atomic batches, which consensus orders
//! into blocks; every block records the state root that execution produced.
//!
//! Digest conventions used throughout: payload digests and state roots are
//! full SHA-512 hex (128 chars); transaction, batch, and block identifiers
//! are the first 64 hex chars of the SHA-512 of their canonical header
//! bytes, so they double as compact handles.

mod address;
mod block;
mod canonical;
mod error;
mod role;
mod signing;
mod state;
mod store;
mod txn;

pub use address::{make_address, Address, Category};
pub use block::Block;
pub use canonical::{canonical_json_bytes, canonical_json_string, sha512_hex};
pub use error::LedgerError;
pub use role::Role;
pub use signing::{
    generate_keypair, keypair_from_seed, public_key_hex, sign_bytes, signing_key_from_hex,
    signing_key_hex, verify_bytes, SigningKey, VerifyingKey,
};
pub use state::GlobalState;
pub use store::ChainStore;
pub use txn::{Batch, BatchHeader, Transaction, TransactionHeader, FAMILY_NAME, FAMILY_VERSION};
