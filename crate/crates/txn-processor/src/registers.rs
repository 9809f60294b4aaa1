//! The five registration commands.
//!
//! Each one parses its args — the same schema the client files use —
//! performs structural checks, and upserts documents into state.
//! Admissibility of a whole purpose spec (weight sums, disjointness,
//! coverage) is deliberately not checked here; that happens when `qos`
//! assembles the spec, where the full picture exists.

use std::collections::BTreeMap;

use ledger_state::{Category, GlobalState};
use ranking_core::MetricClassification;
use serde::Deserialize;

use crate::error::ProcessorError;
use crate::payload::{Command, CommandPayload};
use crate::stored::{
    read_stored, roster_address, write_stored, Roster, StoredEvaluationRow, StoredQi,
    StoredWeights, ROSTER_KEY,
};

type WeightFile = BTreeMap<String, BTreeMap<String, f64>>;

fn check_weight_ranges(command: Command, file: &WeightFile) -> Result<(), ProcessorError> {
    for (group, weights) in file {
        for (key, weight) in weights {
            if !(0.0..=1.0).contains(weight) {
                return Err(ProcessorError::MalformedArgs {
                    command: command.as_str().into(),
                    detail: format!("weight {weight} for {key} in {group} outside [0, 1]"),
                });
            }
        }
    }
    Ok(())
}

/// `qi`: register quality indicators with their metric classifications.
pub fn apply_qi(state: &mut GlobalState, payload: &CommandPayload) -> Result<(), ProcessorError> {
    let indicators: BTreeMap<String, BTreeMap<String, MetricClassification>> =
        payload.parse_args()?;
    if indicators.is_empty() {
        return Err(ProcessorError::MalformedArgs {
            command: "qi".into(),
            detail: "no indicators given".into(),
        });
    }
    for (name, metrics) in &indicators {
        if metrics.is_empty() {
            return Err(ProcessorError::MalformedArgs {
                command: "qi".into(),
                detail: format!("indicator {name} has no metrics"),
            });
        }
    }
    for (name, metrics) in indicators {
        let document = StoredQi {
            name: name.clone(),
            metrics,
        };
        write_stored(state, Category::Qi, &name, &document)?;
    }
    Ok(())
}

/// `cw`, `wmp`, `wmm`: register per-purpose weight maps.
pub fn apply_weights(
    state: &mut GlobalState,
    payload: &CommandPayload,
    category: Category,
) -> Result<(), ProcessorError> {
    let file: WeightFile = payload.parse_args()?;
    if file.is_empty() {
        return Err(ProcessorError::MalformedArgs {
            command: payload.command.as_str().into(),
            detail: "no purposes given".into(),
        });
    }
    check_weight_ranges(payload.command, &file)?;
    for (purpose, weights) in file {
        let document = StoredWeights {
            purpose: purpose.clone(),
            weights,
        };
        write_stored(state, category, &purpose, &document)?;
    }
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MethodArgs {
    generators: Vec<GeneratorRow>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorRow {
    name: String,
    metrics: BTreeMap<String, f64>,
}

/// `method`: register generators and their measured metric values.
///
/// Rows are upserts; new names append to the roster in submission order, so
/// the roster preserves network-wide registration order — the tie-break
/// order rankings use.
pub fn apply_method(
    state: &mut GlobalState,
    payload: &CommandPayload,
) -> Result<(), ProcessorError> {
    let args: MethodArgs = payload.parse_args()?;
    let malformed = |detail: String| ProcessorError::MalformedArgs {
        command: "method".into(),
        detail,
    };
    if args.generators.is_empty() {
        return Err(malformed("no generators given".into()));
    }
    let expected_metrics: Vec<&String> = args.generators[0].metrics.keys().collect();
    if expected_metrics.is_empty() {
        return Err(malformed(format!(
            "generator {} has no metrics",
            args.generators[0].name
        )));
    }
    let mut seen = std::collections::BTreeSet::new();
    for row in &args.generators {
        if !seen.insert(&row.name) {
            return Err(malformed(format!("duplicate generator {}", row.name)));
        }
        let row_metrics: Vec<&String> = row.metrics.keys().collect();
        if row_metrics != expected_metrics {
            return Err(ProcessorError::InconsistentMetrics(format!(
                "generator {} measures different metrics than {}",
                row.name, args.generators[0].name
            )));
        }
    }

    let mut roster: Roster = read_stored(state, Category::Generators, ROSTER_KEY)?
        .unwrap_or_default();
    // Existing rows fix the metric set for all later registrations.
    if let Some(first) = roster.generators.first() {
        let existing: StoredEvaluationRow = read_stored(state, Category::Evaluation, first)?
            .ok_or_else(|| ProcessorError::CorruptState {
                address: roster_address().to_string(),
                detail: format!("roster lists {first} but no evaluation row exists"),
            })?;
        let existing_metrics: Vec<&String> = existing.metrics.keys().collect();
        if existing_metrics != expected_metrics {
            return Err(ProcessorError::InconsistentMetrics(format!(
                "submission measures different metrics than registered generator {first}"
            )));
        }
    }

    for row in &args.generators {
        let document = StoredEvaluationRow {
            name: row.name.clone(),
            metrics: row.metrics.clone(),
        };
        write_stored(state, Category::Evaluation, &row.name, &document)?;
        if !roster.generators.contains(&row.name) {
            roster.generators.push(row.name.clone());
        }
    }
    write_stored(state, Category::Generators, ROSTER_KEY, &roster)?;
    Ok(())
}
