//! Key management: one signing pair per role, persisted as hex files.
//!
//! Keys live in the directory named by the `SYNTHRANK_KEY_DIR` environment
//! variable (default `./keys`), as `<role>.priv` (secret seed, hex) and
//! `<role>.pub` (public key, hex). The `.pub` file exists so the public key
//! can be copied into a genesis role table without touching the secret.

use std::fs;
use std::path::{Path, PathBuf};

use ledger_state::{
    generate_keypair, public_key_hex, signing_key_from_hex, signing_key_hex, SigningKey,
};

use crate::error::CliError;

/// Environment variable naming the key directory.
pub const KEY_DIR_ENV: &str = "SYNTHRANK_KEY_DIR";

/// The key directory: `$SYNTHRANK_KEY_DIR`, or `./keys`.
pub fn key_dir() -> PathBuf {
    std::env::var_os(KEY_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("keys"))
}

fn priv_path(dir: &Path, role: &str) -> PathBuf {
    dir.join(format!("{role}.priv"))
}

fn pub_path(dir: &Path, role: &str) -> PathBuf {
    dir.join(format!("{role}.pub"))
}

/// Generates and persists a key pair for `role`. Refuses to overwrite an
/// existing key unless `force` is set. Returns the public key hex.
pub fn keygen(dir: &Path, role: &str, force: bool) -> Result<String, CliError> {
    let priv_file = priv_path(dir, role);
    if priv_file.exists() && !force {
        return Err(CliError::user(format!(
            "key for role {role:?} already exists at {}; pass --force to overwrite",
            priv_file.display()
        )));
    }
    fs::create_dir_all(dir)
        .map_err(|e| CliError::user(format!("cannot create key directory: {e}")))?;
    let key = generate_keypair();
    let public = public_key_hex(&key);
    fs::write(&priv_file, signing_key_hex(&key))
        .map_err(|e| CliError::user(format!("cannot write {}: {e}", priv_file.display())))?;
    fs::write(pub_path(dir, role), &public)
        .map_err(|e| CliError::user(format!("cannot write public key: {e}")))?;
    Ok(public)
}

/// Loads the signing key for `role`.
pub fn load_key(dir: &Path, role: &str) -> Result<SigningKey, CliError> {
    let path = priv_path(dir, role);
    let hex = fs::read_to_string(&path).map_err(|e| {
        CliError::user(format!(
            "cannot read key for role {role:?} from {}: {e} (run `keygen {role}` first)",
            path.display()
        ))
    })?;
    signing_key_from_hex(hex.trim())
        .map_err(|e| CliError::user(format!("corrupt key file {}: {e}", path.display())))
}

/// Every `<role>.pub` in the directory, as (role, public key hex) pairs,
/// sorted by role. This is what seeds a genesis role table.
pub fn list_public_keys(dir: &Path) -> Result<Vec<(String, String)>, CliError> {
    let mut pairs = Vec::new();
    let entries = fs::read_dir(dir)
        .map_err(|e| CliError::user(format!("cannot read key directory {}: {e}", dir.display())))?;
    for entry in entries {
        let path = entry
            .map_err(|e| CliError::user(format!("cannot list key directory: {e}")))?
            .path();
        if path.extension().and_then(|e| e.to_str()) == Some("pub") {
            let role = path
                .file_stem()
                .and_then(|s| s.to_str())
                .ok_or_else(|| CliError::user("unreadable key file name"))?
                .to_string();
            let public = fs::read_to_string(&path)
                .map_err(|e| CliError::user(format!("cannot read {}: {e}", path.display())))?;
            pairs.push((role, public.trim().to_string()));
        }
    }
    pairs.sort();
    Ok(pairs)
}
