//! On-disk persistence: an append-only block log plus a state snapshot.
//!
//! The block log (`blocks.jsonl`) holds one canonical-JSON block per line
//! and is the source of truth; the snapshot (`state.json`) is a rebuildable
//! convenience so restarts need not re-execute the whole chain.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::block::Block;
use crate::canonical::canonical_json_string;
use crate::error::LedgerError;
use crate::state::GlobalState;

#[derive(Serialize, Deserialize)]
struct Snapshot {
    height: u64,
    state: GlobalState,
}

/// Handle to one node's chain directory.
pub struct ChainStore {
    dir: PathBuf,
}

impl ChainStore {
    /// Opens (creating if needed) the chain directory.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, LedgerError> {
        std::fs::create_dir_all(dir.as_ref())?;
        Ok(ChainStore {
            dir: dir.as_ref().to_path_buf(),
        })
    }

    fn log_path(&self) -> PathBuf {
        self.dir.join("blocks.jsonl")
    }

    fn snapshot_path(&self) -> PathBuf {
        self.dir.join("state.json")
    }

    /// Appends one block to the log.
    pub fn append_block(&self, block: &Block) -> Result<(), LedgerError> {
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(self.log_path())?;
        writeln!(file, "{}", canonical_json_string(block)?)?;
        Ok(())
    }

    /// Reads the whole block log in order; missing log → empty chain.
    pub fn load_blocks(&self) -> Result<Vec<Block>, LedgerError> {
        let file = match File::open(self.log_path()) {
            Ok(file) => file,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e.into()),
        };
        let mut blocks = Vec::new();
        for (index, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let block: Block = serde_json::from_str(&line).map_err(|e| {
                LedgerError::MalformedRecord(format!("block log line {}: {e}", index + 1))
            })?;
            blocks.push(block);
        }
        Ok(blocks)
    }

    /// Writes the snapshot for `height`.
    pub fn save_snapshot(&self, height: u64, state: &GlobalState) -> Result<(), LedgerError> {
        let snapshot = Snapshot {
            height,
            state: state.clone(),
        };
        std::fs::write(self.snapshot_path(), canonical_json_string(&snapshot)?)?;
        Ok(())
    }

    /// Loads the snapshot if one exists.
    pub fn load_snapshot(&self) -> Result<Option<(u64, GlobalState)>, LedgerError> {
        let text = match std::fs::read_to_string(self.snapshot_path()) {
            Ok(text) => text,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let snapshot: Snapshot = serde_json::from_str(&text)
            .map_err(|e| LedgerError::MalformedRecord(format!("snapshot: {e}")))?;
        Ok(Some((snapshot.height, snapshot.state)))
    }
}
