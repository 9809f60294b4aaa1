//! Verb implementations: registration (parse file → sign → submit → poll),
//! reads (fetch → reassemble → print), and the audit round trip.
//!
//! Each verb splits into a quiet core that returns data — usable as a
//! library by harnesses driving a node programmatically — and a thin
//! printing wrapper the binary calls. Read verbs reassemble the registered
//! content into the same document shape the input files use, so a
//! register/read pair round-trips exactly. Ranking output is a
//! fixed-column, tab-separated table sorted by purpose, stable enough to
//! diff across runs.

use std::path::Path;
use std::time::{Duration, Instant};

use consensus_pbft::BatchStatus;
use ledger_state::{
    make_address, public_key_hex, Batch, Category, SigningKey, Transaction,
};
use serde_json::{Map, Value};
use txn_processor::{
    audit_run_id, command_payload, AuditFiles, AuditReport, Command, Roster, StoredEvaluationRow,
    StoredQi, StoredRanking, StoredWeights, ROSTER_KEY,
};

use crate::endpoint::NodeApi;
use crate::error::CliError;

/// Everything a verb needs besides its own arguments.
pub struct Context {
    pub api: Box<dyn NodeApi>,
    pub timeout: Duration,
    pub poll_interval: Duration,
}

/// Reads and parses a JSON input file; parse failures carry the file name
/// and serde's line/column diagnostics.
pub fn load_json_file(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::user(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::user(format!("{}: invalid JSON: {e}", path.display())))
}

/// Cheap client-side shape checks so obvious file mistakes fail fast with a
/// named field; full validation happens on the node at execution.
pub fn check_shape(command: Command, args: &Value) -> Result<(), CliError> {
    let fail = |detail: &str| {
        Err(CliError::user(format!(
            "{} file: {detail}",
            command.as_str()
        )))
    };
    match command {
        Command::Qi | Command::Cw | Command::Wmp | Command::Wmm => {
            if !args.is_object() || args.as_object().is_some_and(Map::is_empty) {
                return fail("expected a non-empty top-level object");
            }
        }
        Command::Method => {
            if !args["generators"].is_array() {
                return fail("expected a top-level \"generators\" list");
            }
        }
        Command::Qos => {
            if !args["purposes"].is_array() {
                return fail("expected a top-level \"purposes\" list");
            }
        }
        Command::Audit => {}
    }
    Ok(())
}

/// Builds, signs, and submits one command without waiting for consensus.
/// Returns the batch id.
pub fn submit_command(
    ctx: &mut Context,
    key: &SigningKey,
    command: Command,
    args: Value,
) -> Result<String, CliError> {
    check_shape(command, &args)?;
    let payload = command_payload(command, args);
    let txn = Transaction::build(key, vec![], vec![], &payload)
        .map_err(|e| CliError::user(format!("cannot build transaction: {e}")))?;
    let batch = Batch::build(key, vec![txn])
        .map_err(|e| CliError::user(format!("cannot build batch: {e}")))?;
    ctx.api.submit(&batch)
}

/// Submits one command and polls it to a terminal status, silently.
/// Returns the commit height.
pub fn submit_and_wait(
    ctx: &mut Context,
    key: &SigningKey,
    command: Command,
    args: Value,
) -> Result<u64, CliError> {
    let id = submit_command(ctx, key, command, args)?;
    let status = await_terminal(ctx, &id)?;
    terminal_height(ctx, &id, status)
}

/// Builds, signs, submits, and polls one command to a terminal status,
/// narrating progress on stdout. Returns the commit height.
pub fn register(
    ctx: &mut Context,
    key: &SigningKey,
    command: Command,
    args: Value,
) -> Result<u64, CliError> {
    let id = submit_command(ctx, key, command, args)?;
    println!("accepted {id}");
    let status = await_terminal(ctx, &id)?;
    let height = terminal_height(ctx, &id, status)?;
    println!("committed at height {height}");
    Ok(height)
}

/// Polls until the batch reaches a terminal status or the timeout passes.
pub fn await_terminal(ctx: &mut Context, id: &str) -> Result<BatchStatus, CliError> {
    let deadline = Instant::now() + ctx.timeout;
    loop {
        match ctx.api.status(id)? {
            BatchStatus::Pending | BatchStatus::Unknown if Instant::now() < deadline => {
                std::thread::sleep(ctx.poll_interval);
            }
            status => return Ok(status),
        }
    }
}

fn terminal_height(ctx: &Context, id: &str, status: BatchStatus) -> Result<u64, CliError> {
    match status {
        BatchStatus::Committed { height } => Ok(height),
        BatchStatus::Invalid { reason } => Err(CliError::node(format!("batch failed: {reason}"))),
        _ => Err(CliError::node(format!(
            "timed out after {:?} waiting for batch {id}",
            ctx.timeout
        ))),
    }
}

fn decode<T: serde::de::DeserializeOwned>(entry_value: &Value) -> Result<T, CliError> {
    serde_json::from_value(entry_value.clone())
        .map_err(|e| CliError::node(format!("unexpected stored document shape: {e}")))
}

fn pretty(value: &Value) -> String {
    serde_json::to_string_pretty(value).expect("assembled documents are plain JSON")
}

/// Every registered indicator reassembled into the qi.txt document shape.
pub fn fetch_qis(ctx: &mut Context) -> Result<Map<String, Value>, CliError> {
    let mut doc = Map::new();
    for entry in ctx.api.read_prefix(&Category::Qi.prefix())? {
        let qi: StoredQi = decode(&entry.value)?;
        doc.insert(qi.name, serde_json::to_value(qi.metrics).unwrap());
    }
    Ok(doc)
}

/// `qis`: reassembles every registered indicator into the qi.txt shape.
pub fn print_qis(ctx: &mut Context) -> Result<(), CliError> {
    let doc = fetch_qis(ctx)?;
    println!("{}", pretty(&Value::Object(doc)));
    Ok(())
}

/// One weight category reassembled into its purpose → weight-map file shape.
pub fn fetch_weights(ctx: &mut Context, category: Category) -> Result<Map<String, Value>, CliError> {
    let mut doc = Map::new();
    for entry in ctx.api.read_prefix(&category.prefix())? {
        let weights: StoredWeights = decode(&entry.value)?;
        doc.insert(
            weights.purpose,
            serde_json::to_value(weights.weights).unwrap(),
        );
    }
    Ok(doc)
}

/// `cws` / `wmps` / `wmms`: purpose → weight map, file shape.
pub fn print_weights(ctx: &mut Context, category: Category) -> Result<(), CliError> {
    let doc = fetch_weights(ctx, category)?;
    println!("{}", pretty(&Value::Object(doc)));
    Ok(())
}

/// The roster in registration order with each generator's evaluation row,
/// reassembled into the method input-file shape.
pub fn fetch_methods(ctx: &mut Context) -> Result<Value, CliError> {
    let roster_address = make_address(Category::Generators, ROSTER_KEY)
        .expect("roster key is non-empty");
    let entries = ctx.api.read_address(roster_address.as_str())?;
    let mut generators = Vec::new();
    if let Some(entry) = entries.first() {
        let roster: Roster = decode(&entry.value)?;
        for name in roster.generators {
            let address = make_address(Category::Evaluation, &name)
                .map_err(|e| CliError::node(e.to_string()))?;
            let rows = ctx.api.read_address(address.as_str())?;
            let row_entry = rows
                .first()
                .ok_or_else(|| CliError::node(format!("roster names {name:?} but no row is stored")))?;
            let row: StoredEvaluationRow = decode(&row_entry.value)?;
            generators.push(serde_json::json!({"name": row.name, "metrics": row.metrics}));
        }
    }
    Ok(serde_json::json!({"generators": generators}))
}

/// `methods`: the roster in registration order with each generator's row.
pub fn print_methods(ctx: &mut Context) -> Result<(), CliError> {
    let doc = fetch_methods(ctx)?;
    println!("{}", pretty(&doc));
    Ok(())
}

const RANK_HEADER: &str = "purpose\trank\tgenerator\tdesired\tundesired\toverall";

fn rank_rows(ranking: &StoredRanking, out: &mut Vec<String>) {
    for entry in &ranking.result.entries {
        out.push(format!(
            "{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}",
            ranking.purpose,
            entry.rank,
            entry.generator,
            entry.desired_score,
            entry.undesired_score,
            entry.overall_score,
        ));
    }
}

/// Every stored ranking, sorted by purpose.
pub fn fetch_rankings(ctx: &mut Context) -> Result<Vec<StoredRanking>, CliError> {
    let mut rankings = Vec::new();
    for entry in ctx.api.read_prefix(&Category::Rankings.prefix())? {
        rankings.push(decode::<StoredRanking>(&entry.value)?);
    }
    rankings.sort_by(|a, b| a.purpose.cmp(&b.purpose));
    Ok(rankings)
}

/// `ranks`: every stored ranking, purposes sorted, fixed columns.
pub fn print_ranks(ctx: &mut Context) -> Result<(), CliError> {
    let rankings = fetch_rankings(ctx)?;
    let mut lines = vec![RANK_HEADER.to_string()];
    for ranking in &rankings {
        rank_rows(ranking, &mut lines);
    }
    println!("{}", lines.join("\n"));
    Ok(())
}

/// One purpose's stored ranking, or "purpose not found".
pub fn fetch_ranking(ctx: &mut Context, purpose: &str) -> Result<StoredRanking, CliError> {
    let address = make_address(Category::Rankings, purpose)
        .map_err(|e| CliError::user(e.to_string()))?;
    let entries = ctx.api.read_address(address.as_str())?;
    let entry = entries
        .first()
        .ok_or_else(|| CliError::user(format!("purpose not found: {purpose:?}")))?;
    decode(&entry.value)
}

/// `rank <purpose>`: one purpose's ranking, or "purpose not found".
pub fn print_rank(ctx: &mut Context, purpose: &str) -> Result<(), CliError> {
    let ranking = fetch_ranking(ctx, purpose)?;
    let mut lines = vec![RANK_HEADER.to_string()];
    rank_rows(&ranking, &mut lines);
    println!("{}", lines.join("\n"));
    Ok(())
}

/// The most recent audit report, ordered by (height, run id).
pub fn latest_audit(ctx: &mut Context) -> Result<AuditReport, CliError> {
    let mut reports = Vec::new();
    for entry in ctx.api.read_prefix(&Category::Audit.prefix())? {
        reports.push(decode::<AuditReport>(&entry.value)?);
    }
    reports
        .into_iter()
        .max_by(|a, b| (a.height, a.run_id.clone()).cmp(&(b.height, b.run_id.clone())))
        .ok_or_else(|| CliError::user("no audit reports found"))
}

/// `isConsistent`: the verdict of the most recent audit.
pub fn print_is_consistent(ctx: &mut Context) -> Result<(), CliError> {
    let latest = latest_audit(ctx)?;
    println!("{}", latest.is_consistent);
    Ok(())
}

/// Submits an audit over in-memory file texts, silently, and returns the
/// stored report.
pub fn audit_texts(
    ctx: &mut Context,
    key: &SigningKey,
    files: AuditFiles,
) -> Result<AuditReport, CliError> {
    let args = serde_json::json!({"files": &files});
    let height = submit_and_wait(ctx, key, Command::Audit, args)?;
    read_audit_report(ctx, key, height, &files)
}

fn read_audit_report(
    ctx: &mut Context,
    key: &SigningKey,
    height: u64,
    files: &AuditFiles,
) -> Result<AuditReport, CliError> {
    let run_id = audit_run_id(height, &public_key_hex(key), files)
        .map_err(|e| CliError::node(e.to_string()))?;
    let address =
        make_address(Category::Audit, &run_id).map_err(|e| CliError::node(e.to_string()))?;
    let entries = ctx.api.read_address(address.as_str())?;
    let entry = entries
        .first()
        .ok_or_else(|| CliError::node(format!("committed audit report {run_id} not readable")))?;
    decode(&entry.value)
}

/// `audit`: submit the five files, then fetch and print the stored report.
pub fn run_audit(
    ctx: &mut Context,
    key: &SigningKey,
    paths: [&Path; 5],
) -> Result<(), CliError> {
    let mut texts = Vec::new();
    for path in paths {
        // The raw bytes are what gets digested; parse only to diagnose.
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::user(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str::<Value>(&text)
            .map_err(|e| CliError::user(format!("{}: invalid JSON: {e}", path.display())))?;
        texts.push(text);
    }
    let [qi, cw, wmp, wmm, inputs] = [0, 1, 2, 3, 4].map(|i| texts[i].clone());
    let files = AuditFiles {
        qi,
        cw,
        wmp,
        wmm,
        inputs,
    };
    let args = serde_json::json!({"files": &files});
    let height = register(ctx, key, Command::Audit, args)?;

    let report = read_audit_report(ctx, key, height, &files)?;
    println!("run {} at height {}", report.run_id, report.height);
    for finding in &report.findings {
        println!(
            "{}\t{:?}\t{}\t{}",
            finding.purpose,
            finding.check,
            if finding.ok { "ok" } else { "FAIL" },
            finding.detail,
        );
    }
    println!("isConsistent: {}", report.is_consistent);
    Ok(())
}
