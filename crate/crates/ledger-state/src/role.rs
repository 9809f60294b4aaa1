//! Network roles identified by their public keys.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::LedgerError;

/// A participant's role on the network.
///
/// Role membership is fixed in the genesis block settings as a map from
/// public key (hex) to role name, so every node resolves a transaction
/// signer to the same role.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    ProductManager,
    DataScientist,
    Auditor,
    Observer,
}

impl Role {
    pub const ALL: [Role; 4] = [
        Role::ProductManager,
        Role::DataScientist,
        Role::Auditor,
        Role::Observer,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Role::ProductManager => "product_manager",
            Role::DataScientist => "data_scientist",
            Role::Auditor => "auditor",
            Role::Observer => "observer",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = LedgerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Role::ALL
            .into_iter()
            .find(|role| role.as_str() == s)
            .ok_or_else(|| LedgerError::MalformedRecord(format!("unknown role {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for role in Role::ALL {
            assert_eq!(role.as_str().parse::<Role>().unwrap(), role);
        }
        assert!("admin".parse::<Role>().is_err());
    }

    #[test]
    fn json_form_is_snake_case() {
        assert_eq!(
            serde_json::to_string(&Role::ProductManager).unwrap(),
            "\"product_manager\""
        );
    }
}
