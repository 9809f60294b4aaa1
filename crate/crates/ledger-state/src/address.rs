//! Deterministic state addressing.
//!
//! An address is 70 lowercase hex characters: a 6-character namespace
//! prefix — the head of `SHA-512("synthrank." + category)` — followed by
//! the first 64 hex characters of `SHA-512(key)`. Both halves are
//! recomputable from the (category, key) pair by any party.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha512};

use crate::error::LedgerError;

/// The product family name; seeds namespace prefixes and transaction headers.
pub const FAMILY: &str = "synthrank";

/// State namespaces, one per kind of record the family stores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Generators,
    Qi,
    QiWeights,
    WmPlus,
    WmMinus,
    Evaluation,
    Rankings,
    Audit,
}

impl Category {
    pub const ALL: [Category; 8] = [
        Category::Generators,
        Category::Qi,
        Category::QiWeights,
        Category::WmPlus,
        Category::WmMinus,
        Category::Evaluation,
        Category::Rankings,
        Category::Audit,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Category::Generators => "generators",
            Category::Qi => "qi",
            Category::QiWeights => "qi_weights",
            Category::WmPlus => "wm_plus",
            Category::WmMinus => "wm_minus",
            Category::Evaluation => "evaluation",
            Category::Rankings => "rankings",
            Category::Audit => "audit",
        }
    }

    /// The 6-hex-character namespace prefix for this category.
    pub fn prefix(&self) -> String {
        let digest = hex::encode(Sha512::digest(format!("{FAMILY}.{}", self.as_str())));
        digest[..6].to_string()
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A 70-hex-character state address.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Address(String);

impl Address {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// True when the address lies inside `category`'s namespace.
    pub fn in_category(&self, category: Category) -> bool {
        self.0.starts_with(&category.prefix())
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for Address {
    type Err = LedgerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.len() == 70 && s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f')) {
            Ok(Address(s.to_string()))
        } else {
            Err(LedgerError::MalformedAddress(s.to_string()))
        }
    }
}

/// Computes the address of `key` inside `category`'s namespace.
pub fn make_address(category: Category, key: &str) -> Result<Address, LedgerError> {
    if key.is_empty() {
        return Err(LedgerError::EmptyKey);
    }
    let suffix = hex::encode(Sha512::digest(key));
    Ok(Address(format!("{}{}", category.prefix(), &suffix[..64])))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_inputs_same_address() {
        let a = make_address(Category::Qi, "data_utility").unwrap();
        let b = make_address(Category::Qi, "data_utility").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn categories_differ_in_prefix_only() {
        let a = make_address(Category::Qi, "k").unwrap();
        let b = make_address(Category::Rankings, "k").unwrap();
        assert_ne!(a.as_str()[..6], b.as_str()[..6]);
        assert_eq!(a.as_str()[6..], b.as_str()[6..]);
    }

    #[test]
    fn all_category_prefixes_are_distinct() {
        let prefixes: std::collections::BTreeSet<String> =
            Category::ALL.iter().map(Category::prefix).collect();
        assert_eq!(prefixes.len(), Category::ALL.len());
    }

    #[test]
    fn addresses_are_seventy_lowercase_hex() {
        let address = make_address(Category::Evaluation, "some generator").unwrap();
        assert_eq!(address.as_str().len(), 70);
        assert!(address
            .as_str()
            .bytes()
            .all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f')));
        assert!(address.in_category(Category::Evaluation));
        assert!(!address.in_category(Category::Audit));
    }

    #[test]
    fn empty_key_is_rejected() {
        assert!(matches!(
            make_address(Category::Qi, ""),
            Err(LedgerError::EmptyKey)
        ));
    }

    #[test]
    fn parsing_validates_shape() {
        let good = make_address(Category::Audit, "run").unwrap();
        assert_eq!(good, good.as_str().parse().unwrap());
        assert!("deadbeef".parse::<Address>().is_err());
        assert!("G".repeat(70).parse::<Address>().is_err());
    }
}
