//! `qos`: assemble each purpose's spec from state, rank, and store.

use std::collections::BTreeMap;

use ledger_state::{Category, GlobalState};
use ranking_core::{
    rank_generators, transform, validate_purpose_spec, EvaluationMatrix, PurposeSpec,
    QualityIndicator,
};
use serde::Deserialize;

use crate::error::ProcessorError;
use crate::payload::CommandPayload;
use crate::stored::{
    read_stored, registered_purposes, write_stored, Roster, StoredEvaluationRow, StoredQi,
    StoredRanking, StoredWeights, ROSTER_KEY,
};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct QosArgs {
    purposes: Vec<String>,
}

/// Reads everything a ranking needs for `purpose` out of state: the
/// assembled spec (qi weights, metric weights, classifications, indicator
/// membership) and the evaluation matrix in roster order.
///
/// Missing pieces are deterministic rejections naming the missing item.
/// Weight maps for the desired/undesired sides may be absent entirely —
/// an unregistered side is an empty side.
pub fn assemble_purpose_inputs(
    state: &GlobalState,
    purpose: &str,
) -> Result<(PurposeSpec, EvaluationMatrix), ProcessorError> {
    let qi_weights: StoredWeights = read_stored(state, Category::QiWeights, purpose)?
        .ok_or_else(|| ProcessorError::MissingForPurpose("qi weights", purpose.to_string()))?;
    let desired: Option<StoredWeights> = read_stored(state, Category::WmPlus, purpose)?;
    let undesired: Option<StoredWeights> = read_stored(state, Category::WmMinus, purpose)?;

    let mut quality_indicators = Vec::new();
    let mut classifications = BTreeMap::new();
    for name in qi_weights.weights.keys() {
        let qi: StoredQi = read_stored(state, Category::Qi, name)?
            .ok_or_else(|| ProcessorError::MissingIndicator(name.clone()))?;
        quality_indicators.push(QualityIndicator {
            name: qi.name,
            metrics: qi.metrics.keys().cloned().collect(),
        });
        for (metric, class) in qi.metrics {
            classifications.insert(metric, class);
        }
    }

    let spec = PurposeSpec {
        purpose: purpose.to_string(),
        qi_weights: qi_weights.weights,
        desired_weights: desired.map(|w| w.weights).unwrap_or_default(),
        undesired_weights: undesired.map(|w| w.weights).unwrap_or_default(),
        classifications,
        quality_indicators,
    };

    Ok((spec, evaluation_matrix(state)?))
}

/// Builds the evaluation matrix from the roster and per-generator rows.
pub fn evaluation_matrix(state: &GlobalState) -> Result<EvaluationMatrix, ProcessorError> {
    let roster: Roster =
        read_stored(state, Category::Generators, ROSTER_KEY)?.unwrap_or_default();
    if roster.generators.is_empty() {
        return Err(ProcessorError::NoGenerators);
    }
    let mut metrics: Option<Vec<String>> = None;
    let mut rows = Vec::with_capacity(roster.generators.len());
    for name in &roster.generators {
        let row: StoredEvaluationRow = read_stored(state, Category::Evaluation, name)?
            .ok_or_else(|| ProcessorError::CorruptState {
                address: crate::stored::roster_address().to_string(),
                detail: format!("roster lists {name} but no evaluation row exists"),
            })?;
        let row_metrics: Vec<String> = row.metrics.keys().cloned().collect();
        match &metrics {
            None => metrics = Some(row_metrics),
            Some(expected) if *expected != row_metrics => {
                return Err(ProcessorError::InconsistentMetrics(format!(
                    "generator {name} measures different metrics than {}",
                    roster.generators[0]
                )));
            }
            Some(_) => {}
        }
        let ordered: Vec<f64> = row.metrics.values().copied().collect();
        rows.push(ordered);
    }
    EvaluationMatrix::new(roster.generators, metrics.unwrap_or_default(), rows)
        .map_err(|e| ProcessorError::Ranking(e.to_string()))
}

/// `qos`: rank the named purposes (all registered ones when the list is
/// empty) and store each result alongside its transform.
pub fn apply_qos(state: &mut GlobalState, payload: &CommandPayload) -> Result<(), ProcessorError> {
    let args: QosArgs = payload.parse_args()?;
    let purposes = if args.purposes.is_empty() {
        let all = registered_purposes(state)?;
        if all.is_empty() {
            return Err(ProcessorError::NoPurposes);
        }
        all
    } else {
        let mut seen = std::collections::BTreeSet::new();
        args.purposes
            .into_iter()
            .filter(|p| seen.insert(p.clone()))
            .collect()
    };

    for purpose in purposes {
        let (spec, eval) = assemble_purpose_inputs(state, &purpose)?;
        let report = validate_purpose_spec(&spec);
        if !report.is_admissible() {
            return Err(ProcessorError::InvalidSpec {
                purpose,
                violations: report.violations,
            });
        }
        let transformed =
            transform(&spec, &eval).map_err(|e| ProcessorError::Ranking(e.to_string()))?;
        let result = rank_generators(&spec, &transformed)
            .map_err(|e| ProcessorError::Ranking(e.to_string()))?;
        let document = StoredRanking {
            purpose: purpose.clone(),
            result,
            transformed,
        };
        write_stored(state, Category::Rankings, &purpose, &document)?;
    }
    Ok(())
}
