//! `audit`: cross-check provided input files against the ledger.
//!
//! The auditor submits the raw text of the five input files (indicator
//! definitions, qi weights, desired/undesired metric weights, generator
//! measurements). Per purpose, three findings are produced:
//!
//! * **SpecMatch** — the provided weight tables and classifications equal
//!   the registered ones.
//! * **EvalMatch** — the provided measurements equal the registered matrix,
//!   and the transform recomputed from the provided files equals the stored
//!   transform.
//! * **RankMatch** — re-ranking from state inputs reproduces the stored
//!   ranking.
//!
//! `isConsistent` is the conjunction of every finding. Unparseable files
//! become failed findings, never execution errors: a garbled audit input is
//! an audit result, not a crashed transaction.

use std::collections::BTreeMap;

use ledger_state::{sha512_hex, Category, GlobalState};
use ranking_core::{
    rank_generators, transform, EvaluationMatrix, MetricClassification, PurposeSpec,
    QualityIndicator,
};
use serde::{Deserialize, Serialize};

use crate::error::ProcessorError;
use crate::payload::CommandPayload;
use crate::qos::assemble_purpose_inputs;
use crate::stored::{read_stored, write_stored, Roster, StoredEvaluationRow, StoredQi,
    StoredRanking, StoredWeights, ROSTER_KEY};

/// Which aspect a finding checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AuditCheck {
    SpecMatch,
    EvalMatch,
    RankMatch,
}

/// One purpose-scoped check outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditFinding {
    pub purpose: String,
    pub check: AuditCheck,
    pub ok: bool,
    pub detail: String,
}

/// The stored audit outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub run_id: String,
    /// Chain height the audit ran at; orders reports so clients can pick
    /// the latest verdict.
    pub height: u64,
    pub findings: Vec<AuditFinding>,
    #[serde(rename = "isConsistent")]
    pub is_consistent: bool,
}

/// Raw file texts as submitted by the auditor.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AuditFiles {
    pub qi: String,
    pub cw: String,
    pub wmp: String,
    pub wmm: String,
    pub inputs: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AuditArgs {
    files: AuditFiles,
}

/// Deterministic id of an audit run: a digest over the chain height, the
/// auditor, and the submitted file contents. Clients can recompute it after
/// commit to locate their report.
pub fn audit_run_id(
    height: u64,
    auditor_public_key: &str,
    files: &AuditFiles,
) -> Result<String, ProcessorError> {
    let fingerprint = serde_json::json!({
        "height": height,
        "auditor": auditor_public_key,
        "files": {
            "qi": sha512_hex(files.qi.as_bytes()),
            "cw": sha512_hex(files.cw.as_bytes()),
            "wmp": sha512_hex(files.wmp.as_bytes()),
            "wmm": sha512_hex(files.wmm.as_bytes()),
            "inputs": sha512_hex(files.inputs.as_bytes()),
        },
    });
    let bytes = ledger_state::canonical_json_bytes(&fingerprint).map_err(ProcessorError::Ledger)?;
    Ok(sha512_hex(&bytes)[..64].to_string())
}

type QiFile = BTreeMap<String, BTreeMap<String, MetricClassification>>;
type WeightFile = BTreeMap<String, BTreeMap<String, f64>>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InputsFile {
    generators: Vec<InputRow>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InputRow {
    name: String,
    metrics: BTreeMap<String, f64>,
}

fn parse<T: serde::de::DeserializeOwned>(label: &str, text: &str) -> Result<T, String> {
    serde_json::from_str(text).map_err(|e| format!("{label} file unparseable: {e}"))
}

/// Runs all checks against `state`, returning the findings in purpose order.
pub fn run_audit(files: &AuditFiles, state: &GlobalState) -> Vec<AuditFinding> {
    let qi_file: Result<QiFile, String> = parse("qi", &files.qi);
    let cw_file: Result<WeightFile, String> = parse("cw", &files.cw);
    let wmp_file: Result<WeightFile, String> = parse("wmp", &files.wmp);
    let wmm_file: Result<WeightFile, String> = parse("wmm", &files.wmm);
    let inputs_file: Result<InputsFile, String> = parse("inputs", &files.inputs);

    // Without a readable cw file there is no purpose list to audit.
    let cw = match &cw_file {
        Ok(cw) => cw,
        Err(detail) => {
            return vec![AuditFinding {
                purpose: "*".into(),
                check: AuditCheck::SpecMatch,
                ok: false,
                detail: detail.clone(),
            }]
        }
    };

    let mut findings = Vec::new();
    for (purpose, provided_cw) in cw {
        findings.push(spec_match(
            purpose,
            provided_cw,
            &qi_file,
            &wmp_file,
            &wmm_file,
            state,
        ));
        findings.push(eval_match(
            purpose,
            provided_cw,
            &qi_file,
            &wmp_file,
            &wmm_file,
            &inputs_file,
            state,
        ));
        findings.push(rank_match(purpose, state));
    }
    findings
}

fn finding(purpose: &str, check: AuditCheck, result: Result<(), String>) -> AuditFinding {
    match result {
        Ok(()) => AuditFinding {
            purpose: purpose.into(),
            check,
            ok: true,
            detail: "match".into(),
        },
        Err(detail) => AuditFinding {
            purpose: purpose.into(),
            check,
            ok: false,
            detail,
        },
    }
}

fn compare_weights(
    label: &str,
    purpose: &str,
    provided: Option<&BTreeMap<String, f64>>,
    category: Category,
    state: &GlobalState,
) -> Result<(), String> {
    let stored: Option<StoredWeights> =
        read_stored(state, category, purpose).map_err(|e| e.reason())?;
    let stored_weights = stored.map(|w| w.weights).unwrap_or_default();
    let provided_weights = provided.cloned().unwrap_or_default();
    if provided_weights != stored_weights {
        return Err(format!("{label} weights for {purpose} differ from ledger"));
    }
    Ok(())
}

fn spec_match(
    purpose: &str,
    provided_cw: &BTreeMap<String, f64>,
    qi_file: &Result<QiFile, String>,
    wmp_file: &Result<WeightFile, String>,
    wmm_file: &Result<WeightFile, String>,
    state: &GlobalState,
) -> AuditFinding {
    let result = (|| -> Result<(), String> {
        let stored_cw: StoredWeights = read_stored(state, Category::QiWeights, purpose)
            .map_err(|e| e.reason())?
            .ok_or_else(|| format!("qi weights for {purpose} not on ledger"))?;
        if *provided_cw != stored_cw.weights {
            return Err(format!("qi weights for {purpose} differ from ledger"));
        }
        let wmp = wmp_file.as_ref().map_err(Clone::clone)?;
        compare_weights("desired", purpose, wmp.get(purpose), Category::WmPlus, state)?;
        let wmm = wmm_file.as_ref().map_err(Clone::clone)?;
        compare_weights(
            "undesired",
            purpose,
            wmm.get(purpose),
            Category::WmMinus,
            state,
        )?;
        let qi = qi_file.as_ref().map_err(Clone::clone)?;
        for name in provided_cw.keys() {
            let provided_metrics = qi
                .get(name)
                .ok_or_else(|| format!("indicator {name} missing from provided qi file"))?;
            let stored: StoredQi = read_stored(state, Category::Qi, name)
                .map_err(|e| e.reason())?
                .ok_or_else(|| format!("indicator {name} not on ledger"))?;
            if *provided_metrics != stored.metrics {
                return Err(format!("indicator {name} classifications differ from ledger"));
            }
        }
        Ok(())
    })();
    finding(purpose, AuditCheck::SpecMatch, result)
}

/// Builds a spec and matrix purely from the provided files.
fn assemble_from_files(
    purpose: &str,
    provided_cw: &BTreeMap<String, f64>,
    qi_file: &QiFile,
    wmp_file: &WeightFile,
    wmm_file: &WeightFile,
    inputs: &InputsFile,
) -> Result<(PurposeSpec, EvaluationMatrix), String> {
    let mut quality_indicators = Vec::new();
    let mut classifications = BTreeMap::new();
    for name in provided_cw.keys() {
        let metrics = qi_file
            .get(name)
            .ok_or_else(|| format!("indicator {name} missing from provided qi file"))?;
        quality_indicators.push(QualityIndicator {
            name: name.clone(),
            metrics: metrics.keys().cloned().collect(),
        });
        for (metric, class) in metrics {
            classifications.insert(metric.clone(), *class);
        }
    }
    let spec = PurposeSpec {
        purpose: purpose.to_string(),
        qi_weights: provided_cw.clone(),
        desired_weights: wmp_file.get(purpose).cloned().unwrap_or_default(),
        undesired_weights: wmm_file.get(purpose).cloned().unwrap_or_default(),
        classifications,
        quality_indicators,
    };
    let generators: Vec<String> = inputs.generators.iter().map(|r| r.name.clone()).collect();
    let metrics: Vec<String> = inputs
        .generators
        .first()
        .map(|r| r.metrics.keys().cloned().collect())
        .unwrap_or_default();
    let rows: Vec<Vec<f64>> = inputs
        .generators
        .iter()
        .map(|r| r.metrics.values().copied().collect())
        .collect();
    let eval = EvaluationMatrix::new(generators, metrics, rows)
        .map_err(|e| format!("provided inputs file is not a valid matrix: {e}"))?;
    Ok((spec, eval))
}

#[allow(clippy::too_many_arguments)]
fn eval_match(
    purpose: &str,
    provided_cw: &BTreeMap<String, f64>,
    qi_file: &Result<QiFile, String>,
    wmp_file: &Result<WeightFile, String>,
    wmm_file: &Result<WeightFile, String>,
    inputs_file: &Result<InputsFile, String>,
    state: &GlobalState,
) -> AuditFinding {
    let result = (|| -> Result<(), String> {
        let inputs = inputs_file.as_ref().map_err(Clone::clone)?;

        // Provided measurements must equal the registered matrix, roster
        // order included.
        let roster: Roster = read_stored(state, Category::Generators, ROSTER_KEY)
            .map_err(|e| e.reason())?
            .unwrap_or_default();
        let provided_names: Vec<&str> =
            inputs.generators.iter().map(|r| r.name.as_str()).collect();
        let roster_names: Vec<&str> = roster.generators.iter().map(String::as_str).collect();
        if provided_names != roster_names {
            return Err("provided generators differ from registered roster".into());
        }
        for row in &inputs.generators {
            let stored: StoredEvaluationRow =
                read_stored(state, Category::Evaluation, &row.name)
                    .map_err(|e| e.reason())?
                    .ok_or_else(|| format!("no measurements on ledger for {}", row.name))?;
            if stored.metrics != row.metrics {
                return Err(format!("measurements for {} differ from ledger", row.name));
            }
        }

        // The transform recomputed from the provided files must equal the
        // stored one.
        let stored_ranking: StoredRanking = read_stored(state, Category::Rankings, purpose)
            .map_err(|e| e.reason())?
            .ok_or_else(|| format!("no stored ranking for {purpose}"))?;
        let qi = qi_file.as_ref().map_err(Clone::clone)?;
        let wmp = wmp_file.as_ref().map_err(Clone::clone)?;
        let wmm = wmm_file.as_ref().map_err(Clone::clone)?;
        let (spec, eval) =
            assemble_from_files(purpose, provided_cw, qi, wmp, wmm, inputs)?;
        let recomputed =
            transform(&spec, &eval).map_err(|e| format!("transform failed: {e}"))?;
        if recomputed != stored_ranking.transformed {
            return Err(format!("transform for {purpose} differs from ledger"));
        }
        Ok(())
    })();
    finding(purpose, AuditCheck::EvalMatch, result)
}

fn rank_match(purpose: &str, state: &GlobalState) -> AuditFinding {
    let result = (|| -> Result<(), String> {
        let stored: StoredRanking = read_stored(state, Category::Rankings, purpose)
            .map_err(|e| e.reason())?
            .ok_or_else(|| format!("no stored ranking for {purpose}"))?;
        let (spec, eval) = assemble_purpose_inputs(state, purpose).map_err(|e| e.reason())?;
        let transformed =
            transform(&spec, &eval).map_err(|e| format!("transform failed: {e}"))?;
        let recomputed = rank_generators(&spec, &transformed)
            .map_err(|e| format!("ranking failed: {e}"))?;
        if recomputed != stored.result {
            return Err(format!("stored ranking for {purpose} differs from recomputation"));
        }
        Ok(())
    })();
    finding(purpose, AuditCheck::RankMatch, result)
}

/// `audit`: run the checks and store the report.
///
/// The run id digests the block height, the auditor's key, and the file
/// texts, so repeated audits land at distinct addresses while replays of
/// the same block stay deterministic.
pub fn apply_audit(
    state: &mut GlobalState,
    payload: &CommandPayload,
    signer_public_key: &str,
    height: u64,
) -> Result<(), ProcessorError> {
    let args: AuditArgs = payload.parse_args()?;
    let findings = run_audit(&args.files, state);
    let is_consistent = findings.iter().all(|f| f.ok);
    let run_id = audit_run_id(height, signer_public_key, &args.files)?;
    let report = AuditReport {
        run_id: run_id.clone(),
        height,
        findings,
        is_consistent,
    };
    write_stored(state, Category::Audit, &run_id, &report)?;
    Ok(())
}
