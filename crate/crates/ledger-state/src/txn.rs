//! Signed transactions and the batches that carry them.
//!
//! A transaction's identifier is the short digest of its canonical header
//! bytes; the signature covers those same bytes. The nonce is derived from
//! the payload and signer, so resubmitting an identical command produces
//! the identical transaction id and deduplicates naturally.

use serde::{Deserialize, Serialize};

use crate::address::{Address, FAMILY};
use crate::canonical::{canonical_json_bytes, sha512_hex, short_digest};
use crate::error::LedgerError;
use crate::signing::{public_key_hex, sign_bytes, verify_bytes, SigningKey};

/// Transaction family name stamped into every header.
pub const FAMILY_NAME: &str = FAMILY;
/// Transaction family version stamped into every header.
pub const FAMILY_VERSION: &str = "1.0";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransactionHeader {
    pub signer_public_key: String,
    pub family_name: String,
    pub family_version: String,
    /// Addresses the transaction may read.
    pub inputs: Vec<Address>,
    /// Addresses the transaction may write.
    pub outputs: Vec<Address>,
    pub payload_digest: String,
    pub nonce: String,
    pub batcher_public_key: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transaction {
    pub header: TransactionHeader,
    /// Canonical JSON command payload, UTF-8.
    pub payload: String,
    /// Hex signature over the canonical header bytes.
    pub signature: String,
}

impl Transaction {
    /// Builds and signs a transaction whose batcher is the signer itself.
    pub fn build(
        key: &SigningKey,
        inputs: Vec<Address>,
        outputs: Vec<Address>,
        payload: &serde_json::Value,
    ) -> Result<Self, LedgerError> {
        let payload_text = crate::canonical::canonical_json_string(payload)?;
        let signer = public_key_hex(key);
        let mut nonce_input = payload_text.clone().into_bytes();
        nonce_input.extend_from_slice(signer.as_bytes());
        let header = TransactionHeader {
            signer_public_key: signer.clone(),
            family_name: FAMILY_NAME.to_string(),
            family_version: FAMILY_VERSION.to_string(),
            inputs,
            outputs,
            payload_digest: sha512_hex(payload_text.as_bytes()),
            nonce: short_digest(&nonce_input)[..16].to_string(),
            batcher_public_key: signer,
        };
        let signature = sign_bytes(key, &canonical_json_bytes(&header)?);
        Ok(Transaction {
            header,
            payload: payload_text,
            signature,
        })
    }

    pub fn header_bytes(&self) -> Result<Vec<u8>, LedgerError> {
        canonical_json_bytes(&self.header)
    }

    /// Short digest of the canonical header bytes.
    pub fn id(&self) -> Result<String, LedgerError> {
        Ok(short_digest(&self.header_bytes()?))
    }

    /// Checks the payload digest and the header signature.
    pub fn verify(&self) -> Result<(), LedgerError> {
        if sha512_hex(self.payload.as_bytes()) != self.header.payload_digest {
            return Err(LedgerError::DigestMismatch(
                "transaction payload does not match header digest".into(),
            ));
        }
        if self.header.family_name != FAMILY_NAME || self.header.family_version != FAMILY_VERSION {
            return Err(LedgerError::MalformedRecord(format!(
                "unknown transaction family {}/{}",
                self.header.family_name, self.header.family_version
            )));
        }
        let ok = verify_bytes(
            &self.header.signer_public_key,
            &self.header_bytes()?,
            &self.signature,
        )?;
        if ok {
            Ok(())
        } else {
            Err(LedgerError::InvalidSignature)
        }
    }

    /// Parses the payload as JSON.
    pub fn payload_json(&self) -> Result<serde_json::Value, LedgerError> {
        serde_json::from_str(&self.payload)
            .map_err(|e| LedgerError::MalformedPayload(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchHeader {
    pub signer_public_key: String,
    pub transaction_ids: Vec<String>,
}

/// An atomic, ordered group of transactions: all apply or none do.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Batch {
    pub header: BatchHeader,
    pub transactions: Vec<Transaction>,
    pub signature: String,
}

impl Batch {
    pub fn build(key: &SigningKey, transactions: Vec<Transaction>) -> Result<Self, LedgerError> {
        let transaction_ids = transactions
            .iter()
            .map(Transaction::id)
            .collect::<Result<Vec<_>, _>>()?;
        let header = BatchHeader {
            signer_public_key: public_key_hex(key),
            transaction_ids,
        };
        let signature = sign_bytes(key, &canonical_json_bytes(&header)?);
        Ok(Batch {
            header,
            transactions,
            signature,
        })
    }

    /// Short digest of the canonical batch header bytes.
    pub fn id(&self) -> Result<String, LedgerError> {
        Ok(short_digest(&canonical_json_bytes(&self.header)?))
    }

    /// Checks the batch signature, the id list, and every transaction.
    pub fn verify(&self) -> Result<(), LedgerError> {
        let ids = self
            .transactions
            .iter()
            .map(Transaction::id)
            .collect::<Result<Vec<_>, _>>()?;
        if ids != self.header.transaction_ids {
            return Err(LedgerError::BatchIdMismatch);
        }
        let ok = verify_bytes(
            &self.header.signer_public_key,
            &canonical_json_bytes(&self.header)?,
            &self.signature,
        )?;
        if !ok {
            return Err(LedgerError::InvalidSignature);
        }
        for txn in &self.transactions {
            txn.verify()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::address::{make_address, Category};
    use crate::signing::keypair_from_seed;
    use serde_json::json;

    fn sample_txn(seed: u8, command: &str) -> Transaction {
        let key = keypair_from_seed([seed; 32]);
        let out = make_address(Category::Qi, "k").unwrap();
        Transaction::build(&key, vec![], vec![out], &json!({"command": command})).unwrap()
    }

    #[test]
    fn built_transactions_verify_and_have_stable_ids() {
        let txn = sample_txn(1, "qi");
        txn.verify().unwrap();
        assert_eq!(txn.id().unwrap(), sample_txn(1, "qi").id().unwrap());
        assert_eq!(txn.id().unwrap().len(), 64);
        assert_eq!(txn.header.nonce.len(), 16);
    }

    #[test]
    fn different_payload_or_signer_changes_the_id() {
        assert_ne!(
            sample_txn(1, "qi").id().unwrap(),
            sample_txn(1, "cw").id().unwrap()
        );
        assert_ne!(
            sample_txn(1, "qi").id().unwrap(),
            sample_txn(2, "qi").id().unwrap()
        );
    }

    #[test]
    fn tampered_payload_fails_digest_check() {
        let mut txn = sample_txn(1, "qi");
        txn.payload = "{\"command\":\"cw\"}".into();
        assert!(matches!(
            txn.verify(),
            Err(LedgerError::DigestMismatch(_))
        ));
    }

    #[test]
    fn tampered_header_fails_signature_check() {
        let mut txn = sample_txn(1, "qi");
        txn.header.nonce = "0000000000000000".into();
        txn.header.payload_digest = sha512_hex(txn.payload.as_bytes());
        assert!(matches!(txn.verify(), Err(LedgerError::InvalidSignature)));
    }

    #[test]
    fn batch_round_trips_and_catches_reordering() {
        let key = keypair_from_seed([9; 32]);
        let batch =
            Batch::build(&key, vec![sample_txn(1, "qi"), sample_txn(1, "cw")]).unwrap();
        batch.verify().unwrap();
        assert_eq!(batch.id().unwrap().len(), 64);

        let mut reordered = batch.clone();
        reordered.transactions.reverse();
        assert!(matches!(
            reordered.verify(),
            Err(LedgerError::BatchIdMismatch)
        ));
    }

    #[test]
    fn canonical_json_round_trip_preserves_the_batch() {
        let key = keypair_from_seed([9; 32]);
        let batch = Batch::build(&key, vec![sample_txn(3, "qos")]).unwrap();
        let text = crate::canonical::canonical_json_string(&batch).unwrap();
        let back: Batch = serde_json::from_str(&text).unwrap();
        assert_eq!(back, batch);
        back.verify().unwrap();
    }
}
