//! Node endpoints: where `--url` points.
//!
//! Two schemes are supported:
//!
//! * `sim:<dir>` (default) — a file-backed simulated network. The directory
//!   holds `cluster.json` (network config plus genesis settings, written by
//!   `init`) and `submissions.jsonl`, the append-only log of every accepted
//!   batch. Each invocation replays the log through a fresh network, which
//!   makes the chain a pure function of the directory contents; new
//!   submissions are appended after they pass the door checks.
//! * `http://host:port` — a real node listener speaking the JSON API.
//!
//! Both go through [`NodeApi`], so every verb behaves identically over
//! either transport.

use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::net::TcpStream;
use std::path::{Path, PathBuf};

use consensus_pbft::{BatchStatus, NetworkConfig};
use ledger_state::Batch;
use node_service::{Cluster, StateEntry};
use serde_json::Value;

use crate::error::CliError;

const CLUSTER_FILE: &str = "cluster.json";
const LOG_FILE: &str = "submissions.jsonl";

/// Transport-independent node operations.
pub trait NodeApi {
    /// Submits a batch; `Ok` is the batch id, `Err` the rejection reason.
    fn submit(&mut self, batch: &Batch) -> Result<String, CliError>;
    /// The node's current view of a batch.
    fn status(&mut self, id: &str) -> Result<BatchStatus, CliError>;
    /// Committed entries under a hex prefix.
    fn read_prefix(&mut self, prefix: &str) -> Result<Vec<StateEntry>, CliError>;
    /// Committed entry at one address (empty if absent).
    fn read_address(&mut self, address: &str) -> Result<Vec<StateEntry>, CliError>;
}

/// Parses `--url` into a live endpoint.
pub fn connect(url: &str) -> Result<Box<dyn NodeApi>, CliError> {
    if let Some(dir) = url.strip_prefix("sim:") {
        Ok(Box::new(SimEndpoint::open(Path::new(dir))?))
    } else if let Some(rest) = url.strip_prefix("http://") {
        let host = rest.split('/').next().unwrap_or_default();
        if host.is_empty() {
            return Err(CliError::user(format!("malformed url {url:?}")));
        }
        Ok(Box::new(HttpEndpoint {
            host: host.to_string(),
        }))
    } else {
        Err(CliError::user(format!(
            "unsupported url {url:?}: expected sim:<dir> or http://host:port"
        )))
    }
}

/// File-backed simulated network.
pub struct SimEndpoint {
    dir: PathBuf,
    cluster: Cluster,
}

impl SimEndpoint {
    /// Creates `cluster.json` (and an empty submission log) in `dir`.
    pub fn init(
        dir: &Path,
        config: &NetworkConfig,
        genesis_settings: &Value,
        force: bool,
    ) -> Result<(), CliError> {
        let cluster_file = dir.join(CLUSTER_FILE);
        if cluster_file.exists() && !force {
            return Err(CliError::user(format!(
                "{} already exists; pass --force to reinitialize",
                cluster_file.display()
            )));
        }
        config
            .validate()
            .map_err(|e| CliError::user(e.to_string()))?;
        fs::create_dir_all(dir)
            .map_err(|e| CliError::user(format!("cannot create {}: {e}", dir.display())))?;
        let document = serde_json::json!({
            "config": config,
            "genesis_settings": genesis_settings,
        });
        let text = ledger_state::canonical_json_string(&document)
            .map_err(|e| CliError::user(e.to_string()))?;
        fs::write(&cluster_file, text)
            .map_err(|e| CliError::user(format!("cannot write {}: {e}", cluster_file.display())))?;
        fs::write(dir.join(LOG_FILE), "")
            .map_err(|e| CliError::user(format!("cannot write submission log: {e}")))?;
        Ok(())
    }

    /// Loads the directory and replays its submission log.
    pub fn open(dir: &Path) -> Result<Self, CliError> {
        let cluster_file = dir.join(CLUSTER_FILE);
        let text = fs::read_to_string(&cluster_file).map_err(|e| {
            CliError::user(format!(
                "cannot read {}: {e} (run `init` first)",
                cluster_file.display()
            ))
        })?;
        let document: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::user(format!("corrupt {}: {e}", cluster_file.display())))?;
        let config: NetworkConfig = serde_json::from_value(document["config"].clone())
            .map_err(|e| CliError::user(format!("corrupt network config: {e}")))?;
        let genesis_settings = document["genesis_settings"].clone();

        let mut submissions = Vec::new();
        let log_path = dir.join(LOG_FILE);
        if log_path.exists() {
            let log = fs::read_to_string(&log_path)
                .map_err(|e| CliError::user(format!("cannot read submission log: {e}")))?;
            for (number, line) in log.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let entry: Value = serde_json::from_str(line).map_err(|e| {
                    CliError::user(format!("corrupt submission log line {}: {e}", number + 1))
                })?;
                let node = entry["node"].as_u64().unwrap_or(0) as usize;
                let batch: Batch = serde_json::from_value(entry["batch"].clone()).map_err(|e| {
                    CliError::user(format!("corrupt batch on log line {}: {e}", number + 1))
                })?;
                submissions.push((node, batch));
            }
        }
        let cluster = Cluster::replay(config, genesis_settings, submissions)
            .map_err(|e| CliError::user(e.to_string()))?;
        Ok(SimEndpoint {
            dir: dir.to_path_buf(),
            cluster,
        })
    }

    fn append_to_log(&self, batch: &Batch) -> Result<(), CliError> {
        let line = serde_json::json!({"node": 0, "batch": batch});
        let mut file = OpenOptions::new()
            .append(true)
            .create(true)
            .open(self.dir.join(LOG_FILE))
            .map_err(|e| CliError::user(format!("cannot open submission log: {e}")))?;
        writeln!(file, "{line}")
            .map_err(|e| CliError::user(format!("cannot append to submission log: {e}")))?;
        Ok(())
    }
}

impl NodeApi for SimEndpoint {
    fn submit(&mut self, batch: &Batch) -> Result<String, CliError> {
        let id = self
            .cluster
            .submit(0, batch.clone())
            .map_err(CliError::node)?;
        self.append_to_log(batch)?;
        Ok(id)
    }

    fn status(&mut self, id: &str) -> Result<BatchStatus, CliError> {
        // Polling is what drives background progress in the simulated world.
        self.cluster.settle();
        Ok(self.cluster.status(0, id))
    }

    fn read_prefix(&mut self, prefix: &str) -> Result<Vec<StateEntry>, CliError> {
        self.cluster.settle();
        self.cluster.read_prefix(0, prefix).map_err(CliError::user)
    }

    fn read_address(&mut self, address: &str) -> Result<Vec<StateEntry>, CliError> {
        self.cluster.settle();
        self.cluster
            .read_address(0, address)
            .map_err(CliError::user)
    }
}

/// A real node listener reached over TCP.
pub struct HttpEndpoint {
    host: String,
}

impl HttpEndpoint {
    fn call(&self, method: &str, target: &str, body: &str) -> Result<(u16, Value), CliError> {
        let mut stream = TcpStream::connect(&self.host)
            .map_err(|e| CliError::user(format!("cannot reach node at {}: {e}", self.host)))?;
        write!(
            stream,
            "{method} {target} HTTP/1.1\r\nHost: {}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
            self.host,
            body.len(),
        )
        .map_err(|e| CliError::node(format!("request failed: {e}")))?;
        let mut response = String::new();
        use std::io::Read as _;
        stream
            .read_to_string(&mut response)
            .map_err(|e| CliError::node(format!("response failed: {e}")))?;
        let code: u16 = response
            .split_whitespace()
            .nth(1)
            .and_then(|c| c.parse().ok())
            .ok_or_else(|| CliError::node("malformed response status line"))?;
        let split = response
            .find("\r\n\r\n")
            .ok_or_else(|| CliError::node("malformed response: missing body"))?;
        let payload: Value = serde_json::from_str(&response[split + 4..])
            .map_err(|e| CliError::node(format!("malformed response body: {e}")))?;
        Ok((code, payload))
    }

    fn error_of(payload: &Value) -> String {
        payload["error"]
            .as_str()
            .unwrap_or("unexplained node error")
            .to_string()
    }
}

impl NodeApi for HttpEndpoint {
    fn submit(&mut self, batch: &Batch) -> Result<String, CliError> {
        let body = serde_json::to_string(batch)
            .map_err(|e| CliError::user(format!("cannot encode batch: {e}")))?;
        let (code, payload) = self.call("POST", "/batches", &body)?;
        match code {
            202 => payload["id"]
                .as_str()
                .map(str::to_string)
                .ok_or_else(|| CliError::node("submission response missing id")),
            _ => Err(CliError::node(Self::error_of(&payload))),
        }
    }

    fn status(&mut self, id: &str) -> Result<BatchStatus, CliError> {
        let (code, payload) = self.call("GET", &format!("/batch_statuses?id={id}"), "")?;
        if code != 200 {
            return Err(CliError::node(Self::error_of(&payload)));
        }
        serde_json::from_value(payload["status"].clone())
            .map_err(|e| CliError::node(format!("malformed status: {e}")))
    }

    fn read_prefix(&mut self, prefix: &str) -> Result<Vec<StateEntry>, CliError> {
        let (code, payload) = self.call("GET", &format!("/state?prefix={prefix}"), "")?;
        if code != 200 {
            return Err(CliError::user(Self::error_of(&payload)));
        }
        serde_json::from_value(payload["entries"].clone())
            .map_err(|e| CliError::node(format!("malformed entries: {e}")))
    }

    fn read_address(&mut self, address: &str) -> Result<Vec<StateEntry>, CliError> {
        let (code, payload) = self.call("GET", &format!("/state/{address}"), "")?;
        if code != 200 {
            return Err(CliError::user(Self::error_of(&payload)));
        }
        serde_json::from_value(payload["entries"].clone())
            .map_err(|e| CliError::node(format!("malformed entries: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn urls_parse_by_scheme() {
        assert!(connect("ftp://x").is_err());
        assert!(connect("http:///").is_err());
        // sim: on a missing directory fails with a hint to init.
        let err = connect("sim:/definitely/missing").err().expect("must fail");
        assert!(err.to_string().contains("init"));
    }

    #[test]
    fn init_refuses_overwrite_without_force() {
        let dir = tempfile::tempdir().unwrap();
        let config = NetworkConfig::honest(4, 1, 7);
        let settings = serde_json::json!({"roles": {}});
        SimEndpoint::init(dir.path(), &config, &settings, false).unwrap();
        let err = SimEndpoint::init(dir.path(), &config, &settings, false).unwrap_err();
        assert!(err.to_string().contains("--force"));
        SimEndpoint::init(dir.path(), &config, &settings, true).unwrap();
        SimEndpoint::open(dir.path()).unwrap();
    }
}
