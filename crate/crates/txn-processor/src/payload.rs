//! Command payload encoding: `{"command": <verb>, "args": <document>}`.

use serde::{Deserialize, Serialize};

use crate::error::ProcessorError;

/// The supported verbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Register quality indicators and their metric classifications.
    Qi,
    /// Register per-purpose quality-indicator (category) weights.
    Cw,
    /// Register per-purpose desired metric weights.
    Wmp,
    /// Register per-purpose undesired metric weights.
    Wmm,
    /// Register generators with their measured metric values.
    Method,
    /// Compute and store rankings for purposes.
    Qos,
    /// Cross-check registered inputs, transforms, and rankings.
    Audit,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Qi => "qi",
            Command::Cw => "cw",
            Command::Wmp => "wmp",
            Command::Wmm => "wmm",
            Command::Method => "method",
            Command::Qos => "qos",
            Command::Audit => "audit",
        }
    }
}

/// A decoded command payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandPayload {
    pub command: Command,
    pub args: serde_json::Value,
}

impl CommandPayload {
    /// Decodes payload text, rejecting unknown verbs and stray fields.
    pub fn decode(payload: &str) -> Result<Self, ProcessorError> {
        // Surface an unknown verb as its own reason rather than a generic
        // parse error, since that is the most common client mistake.
        let probe: serde_json::Value = serde_json::from_str(payload).map_err(|e| {
            ProcessorError::MalformedArgs {
                command: "?".into(),
                detail: e.to_string(),
            }
        })?;
        if let Some(verb) = probe.get("command").and_then(|v| v.as_str()) {
            if !matches!(verb, "qi" | "cw" | "wmp" | "wmm" | "method" | "qos" | "audit") {
                return Err(ProcessorError::UnknownCommand(verb.to_string()));
            }
        }
        serde_json::from_value(probe).map_err(|e| ProcessorError::MalformedArgs {
            command: "?".into(),
            detail: e.to_string(),
        })
    }

    /// Parses `args` into a concrete schema, mapping failures to the
    /// command's deterministic rejection.
    pub fn parse_args<T: serde::de::DeserializeOwned>(&self) -> Result<T, ProcessorError> {
        serde_json::from_value(self.args.clone()).map_err(|e| ProcessorError::MalformedArgs {
            command: self.command.as_str().into(),
            detail: e.to_string(),
        })
    }
}

/// Builds the canonical payload value for a command — the form clients sign.
pub fn command_payload(command: Command, args: serde_json::Value) -> serde_json::Value {
    serde_json::json!({"command": command.as_str(), "args": args})
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn decodes_known_verbs() {
        let payload = CommandPayload::decode(r#"{"command":"qi","args":{}}"#).unwrap();
        assert_eq!(payload.command, Command::Qi);
        assert_eq!(payload.args, json!({}));
    }

    #[test]
    fn rejects_unknown_verbs_by_name() {
        let err = CommandPayload::decode(r#"{"command":"drop_tables","args":{}}"#).unwrap_err();
        assert_eq!(err.reason(), "unknown command: drop_tables");
    }

    #[test]
    fn rejects_stray_fields_and_garbage() {
        assert!(CommandPayload::decode(r#"{"command":"qi","args":{},"x":1}"#).is_err());
        assert!(CommandPayload::decode("not json").is_err());
    }

    #[test]
    fn round_trips_through_the_builder() {
        let value = command_payload(Command::Qos, json!({"purposes": []}));
        let payload = CommandPayload::decode(&value.to_string()).unwrap();
        assert_eq!(payload.command, Command::Qos);
    }
}
