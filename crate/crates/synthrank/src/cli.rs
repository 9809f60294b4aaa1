//! Flag grammar and verb dispatch.
//!
//! Global flags: `--url` picks the node endpoint (`sim:<dir>` by default so
//! everything works hermetically; `http://host:port` for a live listener),
//! `--key` names the signing role for write verbs, `--timeout` bounds status
//! polling (seconds, default 30), `--poll-interval-ms` sets the poll cadence
//! (default 100). The key directory comes from `$SYNTHRANK_KEY_DIR`
//! (default `./keys`).

use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand};
use consensus_pbft::NetworkConfig;
use ledger_state::{Category, SigningKey};
use serde_json::json;
use txn_processor::Command;

use crate::commands::{self, Context};
use crate::endpoint::{self, SimEndpoint};
use crate::error::CliError;
use crate::keys;

#[derive(Debug, Parser)]
#[command(
    name = "synthrank",
    version,
    about = "Client for the synthetic-data generator ranking ledger"
)]
pub struct Cli {
    /// Node endpoint: sim:<dir> (file-backed simulated network) or
    /// http://host:port (live listener).
    #[arg(long, global = true, default_value = "sim:ledger")]
    pub url: String,

    /// Signing role for write verbs; names a key in the key directory.
    #[arg(long, global = true)]
    pub key: Option<String>,

    /// Seconds to wait for a submitted batch to reach a terminal status.
    #[arg(long, global = true, default_value_t = 30)]
    pub timeout: u64,

    /// Milliseconds between status polls.
    #[arg(long, global = true, default_value_t = 100)]
    pub poll_interval_ms: u64,

    #[command(subcommand)]
    pub verb: Verb,
}

#[derive(Debug, Subcommand)]
pub enum Verb {
    /// Generate a key pair for a role (e.g. product_manager).
    Keygen {
        role: String,
        /// Overwrite an existing key.
        #[arg(long)]
        force: bool,
    },
    /// Initialize a sim:<dir> network; genesis roles come from every
    /// <role>.pub in the key directory.
    Init {
        /// Validator count.
        #[arg(long, default_value_t = 4)]
        nodes: usize,
        /// Tolerated faulty validators (requires nodes >= 3*faulty+1).
        #[arg(long, default_value_t = 1)]
        faulty: usize,
        /// Network determinism seed.
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Replace an existing network directory.
        #[arg(long)]
        force: bool,
    },
    /// Register quality indicators and metric classifications (qi.txt).
    Qi { file: PathBuf },
    /// Register per-purpose indicator weights (weights.txt).
    Cw { file: PathBuf },
    /// Register per-purpose desired metric weights (WM_plus file).
    Wmp { file: PathBuf },
    /// Register per-purpose undesired metric weights (WM_minus file).
    Wmm { file: PathBuf },
    /// Register generators with measured metric values (inputs.txt).
    Method { file: PathBuf },
    /// Compute and store rankings (compute.txt lists the purposes).
    Qos { file: PathBuf },
    /// Cross-check five input files against the ledger and store the report.
    Audit {
        qi: PathBuf,
        cw: PathBuf,
        wmp: PathBuf,
        wmm: PathBuf,
        inputs: PathBuf,
    },
    /// Print one purpose's ranking.
    Rank { purpose: String },
    /// Print all rankings (sorted by purpose, fixed columns).
    Ranks,
    /// Print the latest audit verdict.
    #[command(name = "isConsistent")]
    IsConsistent,
    /// Print registered generators and their metric values.
    Methods,
    /// Print registered indicator weights per purpose.
    Cws,
    /// Print registered desired metric weights per purpose.
    Wmps,
    /// Print registered undesired metric weights per purpose.
    Wmms,
    /// Print registered quality indicators.
    Qis,
}

fn require_key(role: &Option<String>) -> Result<SigningKey, CliError> {
    let role = role
        .as_deref()
        .ok_or_else(|| CliError::user("this verb writes to the ledger; pass --key <role>"))?;
    keys::load_key(&keys::key_dir(), role)
}

fn init(url: &str, nodes: usize, faulty: usize, seed: u64, force: bool) -> Result<(), CliError> {
    let dir = url.strip_prefix("sim:").ok_or_else(|| {
        CliError::user("init only applies to sim:<dir> endpoints; pass --url sim:<dir>")
    })?;
    let key_dir = keys::key_dir();
    let pairs = keys::list_public_keys(&key_dir)?;
    if pairs.is_empty() {
        return Err(CliError::user(format!(
            "no keys in {}; run `keygen <role>` for each role first",
            key_dir.display()
        )));
    }
    let mut roles = serde_json::Map::new();
    for (role, public) in &pairs {
        roles.insert(public.clone(), json!(role));
    }
    let config = NetworkConfig::honest(nodes, faulty, seed);
    SimEndpoint::init(Path::new(dir), &config, &json!({"roles": roles}), force)?;
    println!(
        "initialized {dir}: {nodes} validators (f={faulty}, seed {seed}), {} genesis roles",
        pairs.len()
    );
    Ok(())
}

/// Runs one parsed invocation.
pub fn run(cli: Cli) -> Result<(), CliError> {
    // Setup verbs that must not require an existing endpoint.
    match &cli.verb {
        Verb::Keygen { role, force } => {
            let dir = keys::key_dir();
            let public = keys::keygen(&dir, role, *force)?;
            println!("wrote {0}/{role}.priv and {0}/{role}.pub", dir.display());
            println!("public key for {role}: {public}");
            return Ok(());
        }
        Verb::Init {
            nodes,
            faulty,
            seed,
            force,
        } => return init(&cli.url, *nodes, *faulty, *seed, *force),
        _ => {}
    }

    let api = endpoint::connect(&cli.url)?;
    let mut ctx = Context {
        api,
        timeout: Duration::from_secs(cli.timeout),
        poll_interval: Duration::from_millis(cli.poll_interval_ms),
    };

    match cli.verb {
        Verb::Keygen { .. } | Verb::Init { .. } => unreachable!("handled above"),
        Verb::Qi { file } => {
            let key = require_key(&cli.key)?;
            let args = commands::load_json_file(&file)?;
            commands::register(&mut ctx, &key, Command::Qi, args).map(drop)
        }
        Verb::Cw { file } => {
            let key = require_key(&cli.key)?;
            let args = commands::load_json_file(&file)?;
            commands::register(&mut ctx, &key, Command::Cw, args).map(drop)
        }
        Verb::Wmp { file } => {
            let key = require_key(&cli.key)?;
            let args = commands::load_json_file(&file)?;
            commands::register(&mut ctx, &key, Command::Wmp, args).map(drop)
        }
        Verb::Wmm { file } => {
            let key = require_key(&cli.key)?;
            let args = commands::load_json_file(&file)?;
            commands::register(&mut ctx, &key, Command::Wmm, args).map(drop)
        }
        Verb::Method { file } => {
            let key = require_key(&cli.key)?;
            let args = commands::load_json_file(&file)?;
            commands::register(&mut ctx, &key, Command::Method, args).map(drop)
        }
        Verb::Qos { file } => {
            let key = require_key(&cli.key)?;
            let args = commands::load_json_file(&file)?;
            commands::register(&mut ctx, &key, Command::Qos, args).map(drop)
        }
        Verb::Audit {
            qi,
            cw,
            wmp,
            wmm,
            inputs,
        } => {
            let key = require_key(&cli.key)?;
            commands::run_audit(&mut ctx, &key, [&qi, &cw, &wmp, &wmm, &inputs])
        }
        Verb::Rank { purpose } => commands::print_rank(&mut ctx, &purpose),
        Verb::Ranks => commands::print_ranks(&mut ctx),
        Verb::IsConsistent => commands::print_is_consistent(&mut ctx),
        Verb::Methods => commands::print_methods(&mut ctx),
        Verb::Cws => commands::print_weights(&mut ctx, Category::QiWeights),
        Verb::Wmps => commands::print_weights(&mut ctx, Category::WmPlus),
        Verb::Wmms => commands::print_weights(&mut ctx, Category::WmMinus),
        Verb::Qis => commands::print_qis(&mut ctx),
    }
}
