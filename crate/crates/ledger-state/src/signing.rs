//! Ed25519 signing helpers with hex-encoded key material.
//!
//! Keys travel as hex strings: 64 chars for a public key, 64 chars for a
//! private seed. All header signatures across transactions, batches, and
//! blocks go through [`sign_bytes`]/[`verify_bytes`].

pub use ed25519_dalek::{SigningKey, VerifyingKey};

use ed25519_dalek::{Signature, Signer, Verifier};
use rand::rngs::OsRng;

use crate::error::LedgerError;

/// Generates a fresh random keypair.
pub fn generate_keypair() -> SigningKey {
    SigningKey::generate(&mut OsRng)
}

/// Derives a keypair deterministically from a 32-byte seed.
pub fn keypair_from_seed(seed: [u8; 32]) -> SigningKey {
    SigningKey::from_bytes(&seed)
}

/// Hex encoding of the public half.
pub fn public_key_hex(key: &SigningKey) -> String {
    hex::encode(key.verifying_key().to_bytes())
}

/// Hex encoding of the private seed (for key files).
pub fn signing_key_hex(key: &SigningKey) -> String {
    hex::encode(key.to_bytes())
}

/// Reconstructs a signing key from its hex seed.
pub fn signing_key_from_hex(seed_hex: &str) -> Result<SigningKey, LedgerError> {
    let bytes: [u8; 32] = hex::decode(seed_hex)
        .map_err(|e| LedgerError::MalformedKey(e.to_string()))?
        .try_into()
        .map_err(|_| LedgerError::MalformedKey("seed must be 32 bytes".into()))?;
    Ok(SigningKey::from_bytes(&bytes))
}

/// Signs `bytes`, returning the signature as hex.
pub fn sign_bytes(key: &SigningKey, bytes: &[u8]) -> String {
    hex::encode(key.sign(bytes).to_bytes())
}

/// Verifies `signature_hex` over `bytes` against a hex public key.
///
/// Malformed key material is an error; a well-formed signature that simply
/// does not match is `Ok(false)`.
pub fn verify_bytes(
    public_key_hex: &str,
    bytes: &[u8],
    signature_hex: &str,
) -> Result<bool, LedgerError> {
    let key_bytes: [u8; 32] = hex::decode(public_key_hex)
        .map_err(|e| LedgerError::MalformedKey(e.to_string()))?
        .try_into()
        .map_err(|_| LedgerError::MalformedKey("public key must be 32 bytes".into()))?;
    let key = VerifyingKey::from_bytes(&key_bytes)
        .map_err(|e| LedgerError::MalformedKey(e.to_string()))?;
    let sig_bytes: [u8; 64] = match hex::decode(signature_hex) {
        Ok(bytes) => match bytes.try_into() {
            Ok(array) => array,
            Err(_) => return Ok(false),
        },
        Err(_) => return Ok(false),
    };
    Ok(key.verify(bytes, &Signature::from_bytes(&sig_bytes)).is_ok())
}
