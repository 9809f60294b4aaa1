//! Shapes of the documents the family stores, and where it stores them.
//!
//! | category    | key          | document                                  |
//! |-------------|--------------|-------------------------------------------|
//! | qi          | qi name      | [`StoredQi`]                               |
//! | qi_weights  | purpose      | [`StoredWeights`] (qi → weight)            |
//! | wm_plus     | purpose      | [`StoredWeights`] (metric → weight)        |
//! | wm_minus    | purpose      | [`StoredWeights`] (metric → weight)        |
//! | generators  | "roster"     | [`Roster`] (registration order)            |
//! | evaluation  | generator    | [`StoredEvaluationRow`]                    |
//! | rankings    | purpose      | [`StoredRanking`]                          |
//! | audit       | run id       | [`crate::AuditReport`]                     |

use std::collections::BTreeMap;

use ledger_state::{make_address, Address, Category, GlobalState, LedgerError};
use ranking_core::{MetricClassification, RankingResult, TransformedMatrices};
use serde::{Deserialize, Serialize};

use crate::error::ProcessorError;

/// Key of the generator roster inside the `generators` namespace.
pub const ROSTER_KEY: &str = "roster";

/// One registered quality indicator and its metric classifications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredQi {
    pub name: String,
    pub metrics: BTreeMap<String, MetricClassification>,
}

/// One purpose's weight map (qi weights or metric weights).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredWeights {
    pub purpose: String,
    pub weights: BTreeMap<String, f64>,
}

/// Generator names in registration order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Roster {
    pub generators: Vec<String>,
}

/// One generator's measured metric values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredEvaluationRow {
    pub name: String,
    pub metrics: BTreeMap<String, f64>,
}

/// A stored ranking: the result plus the transform it came from, so
/// auditors can check the intermediate step as well as the outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredRanking {
    pub purpose: String,
    pub result: RankingResult,
    pub transformed: TransformedMatrices,
}

/// Address of the generator roster.
pub fn roster_address() -> Address {
    make_address(Category::Generators, ROSTER_KEY).expect("roster key is non-empty")
}

/// Reads and parses the document at (`category`, `key`), if present.
pub fn read_stored<T: serde::de::DeserializeOwned>(
    state: &GlobalState,
    category: Category,
    key: &str,
) -> Result<Option<T>, ProcessorError> {
    let address = make_address(category, key)?;
    match state.get(&address) {
        None => Ok(None),
        Some(text) => {
            serde_json::from_str(text).map(Some).map_err(|e| ProcessorError::CorruptState {
                address: address.to_string(),
                detail: e.to_string(),
            })
        }
    }
}

/// Serializes and writes a document at (`category`, `key`).
pub fn write_stored<T: Serialize>(
    state: &mut GlobalState,
    category: Category,
    key: &str,
    document: &T,
) -> Result<(), ProcessorError> {
    let address = make_address(category, key)?;
    let text = ledger_state::canonical_json_string(document).map_err(LedgerError::from)?;
    state.set(address, text);
    Ok(())
}

/// All purposes with registered qi weights, in sorted order.
pub fn registered_purposes(state: &GlobalState) -> Result<Vec<String>, ProcessorError> {
    let mut purposes = Vec::new();
    for (address, text) in state.entries_in_category(Category::QiWeights) {
        let stored: StoredWeights =
            serde_json::from_str(text).map_err(|e| ProcessorError::CorruptState {
                address: address.to_string(),
                detail: e.to_string(),
            })?;
        purposes.push(stored.purpose);
    }
    purposes.sort();
    Ok(purposes)
}
