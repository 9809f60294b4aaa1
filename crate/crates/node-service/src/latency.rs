//! Latency probe: timed write and read operations against a running network.
//!
//! Each repetition registers the full input corpus (indicators, weights,
//! measurements), triggers a rank computation, and runs an audit — timing
//! every write from submission to commit on the serving node — then times
//! one read per dataset. Every repetition signs its batches with a fresh
//! batcher key, so each write is a genuinely distinct batch that must travel
//! through consensus rather than hitting the duplicate-submission cache.
//!
//! Samples are wall-clock milliseconds of harness compute per operation.
//! Absolute values are platform-bound; the shape that travels is relative:
//! writes carry full consensus round trips while reads are answered from one
//! node's committed state, so mean write latency is expected to exceed mean
//! read latency. The report states that comparison; it never asserts it.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use ledger_state::{
    canonical_json_string, keypair_from_seed, make_address, public_key_hex, Batch, Category,
    SigningKey, Transaction,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use txn_processor::{command_payload, Command};

use crate::error::ServiceError;
use crate::service::Cluster;

/// Labels for the timed write datasets, one per registered artifact.
pub const WRITE_LABELS: [&str; 7] = [
    "Register E Matrix",
    "Audit Verification and Register Result",
    "Register QI",
    "Register WM_minus",
    "Register WM_plus",
    "Register CW",
    "Rank Compute and Register Rank",
];

/// Labels for the timed read datasets.
pub const READ_LABELS: [&str; 7] = [
    "Read QI and Metrics",
    "Read ranks",
    "Read rank",
    "Read WM_plus",
    "Read WM_minus",
    "Read E matrix",
    "Read CW",
];

/// The input corpus and signing keys a probe run registers.
#[derive(Debug, Clone)]
pub struct ProbeFixtures {
    pub manager: SigningKey,
    pub scientist: SigningKey,
    pub auditor: SigningKey,
    /// Indicator classifications, keyed category -> metric -> kind.
    pub qi: Value,
    /// Category weights per purpose.
    pub cw: Value,
    /// Desired metric weights per purpose.
    pub wmp: Value,
    /// Undesired metric weights per purpose.
    pub wmm: Value,
    /// Generator roster with measured metric values.
    pub inputs: Value,
    /// Purpose whose single ranking the `Read rank` dataset fetches.
    pub purpose: String,
}

impl ProbeFixtures {
    /// A small self-consistent corpus: one purpose, two generators.
    pub fn demo() -> Self {
        ProbeFixtures {
            manager: keypair_from_seed([101; 32]),
            scientist: keypair_from_seed([102; 32]),
            auditor: keypair_from_seed([103; 32]),
            qi: json!({
                "fidelity": {
                    "pcd": {"kind": "lower_better"},
                    "sc": {"kind": "higher_better"},
                },
                "utility": {"acc": {"kind": "higher_better"}},
            }),
            cw: json!({"training": {"fidelity": 0.5, "utility": 0.5}}),
            wmp: json!({"training": {"sc": 0.6, "acc": 0.4}}),
            wmm: json!({"training": {"pcd": 1.0}}),
            inputs: json!({"generators": [
                {"name": "alpha", "metrics": {"pcd": 0.1, "sc": 0.8, "acc": 0.9}},
                {"name": "beta", "metrics": {"pcd": 0.2, "sc": 0.6, "acc": 0.95}},
            ]}),
            purpose: "training".into(),
        }
    }

    /// Genesis role table granting each fixture key its role.
    pub fn genesis_settings(&self) -> Value {
        json!({"roles": {
            public_key_hex(&self.manager): "product_manager",
            public_key_hex(&self.scientist): "data_scientist",
            public_key_hex(&self.auditor): "auditor",
        }})
    }

    /// The audit command arguments: raw text of the five input files.
    pub fn audit_args(&self) -> Result<Value, ServiceError> {
        Ok(json!({"files": {
            "qi": canonical_json_string(&self.qi)?,
            "cw": canonical_json_string(&self.cw)?,
            "wmp": canonical_json_string(&self.wmp)?,
            "wmm": canonical_json_string(&self.wmm)?,
            "inputs": canonical_json_string(&self.inputs)?,
        }}))
    }
}

/// Per-label latency samples in milliseconds, ready for JSON export.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatencyReport {
    pub repetitions: usize,
    pub write_ms: BTreeMap<String, Vec<f64>>,
    pub read_ms: BTreeMap<String, Vec<f64>>,
}

impl LatencyReport {
    fn new(repetitions: usize) -> Self {
        let empty = |labels: &[&str]| {
            labels
                .iter()
                .map(|l| (l.to_string(), Vec::new()))
                .collect::<BTreeMap<_, _>>()
        };
        LatencyReport {
            repetitions,
            write_ms: empty(&WRITE_LABELS),
            read_ms: empty(&READ_LABELS),
        }
    }

    fn mean(samples: impl Iterator<Item = f64>) -> f64 {
        let (mut sum, mut n) = (0.0, 0usize);
        for s in samples {
            sum += s;
            n += 1;
        }
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    }

    /// Mean across every write sample.
    pub fn mean_write_ms(&self) -> f64 {
        Self::mean(self.write_ms.values().flatten().copied())
    }

    /// Mean across every read sample.
    pub fn mean_read_ms(&self) -> f64 {
        Self::mean(self.read_ms.values().flatten().copied())
    }

    /// Canonical JSON for offline plotting.
    pub fn to_json(&self) -> Result<String, ServiceError> {
        Ok(canonical_json_string(&serde_json::to_value(self)?)?)
    }

    /// Human-readable per-label means plus the write-vs-read comparison.
    /// The comparison is reported, never asserted: absolute timings are
    /// platform-bound.
    pub fn summary(&self) -> String {
        let mut lines = Vec::new();
        lines.push(format!("latency probe: {} repetitions", self.repetitions));
        for (section, samples) in [("write", &self.write_ms), ("read", &self.read_ms)] {
            for (label, values) in samples {
                lines.push(format!(
                    "  {section} {label}: n={} mean={:.4} ms",
                    values.len(),
                    Self::mean(values.iter().copied()),
                ));
            }
        }
        lines.push(format!(
            "  aggregate: mean write {:.4} ms vs mean read {:.4} ms (writes include consensus round trips)",
            self.mean_write_ms(),
            self.mean_read_ms(),
        ));
        lines.join("\n")
    }
}

/// Milliseconds since `started`, clamped positive so a sample can never be
/// flattened to zero by clock granularity.
fn elapsed_ms(started: Instant) -> f64 {
    started.elapsed().max(Duration::from_nanos(1)).as_secs_f64() * 1e3
}

/// Submits one command as a fresh batch, settles the network, and returns
/// the submit-to-commit wall time in milliseconds.
fn timed_write(
    cluster: &mut Cluster,
    node: usize,
    label: &str,
    signer: &SigningKey,
    batcher: &SigningKey,
    command: Command,
    args: Value,
) -> Result<f64, ServiceError> {
    let payload = command_payload(command, args);
    let txn = Transaction::build(signer, vec![], vec![], &payload)?;
    let batch = Batch::build(batcher, vec![txn])?;
    let started = Instant::now();
    let id = cluster
        .submit(node, batch)
        .map_err(|reason| ServiceError::Probe(format!("probe write {label:?} rejected: {reason}")))?;
    cluster.settle();
    let ms = elapsed_ms(started);
    match cluster.status(node, &id) {
        consensus_pbft::BatchStatus::Committed { .. } => Ok(ms),
        other => Err(ServiceError::Probe(format!(
            "probe write {label:?} did not commit: {other:?}"
        ))),
    }
}

/// Runs the probe: `repetitions` rounds of seven timed writes and seven
/// timed reads against `node`. Zero repetitions yields empty sample sets.
pub fn run_latency_probe(
    cluster: &mut Cluster,
    node: usize,
    fixtures: &ProbeFixtures,
    repetitions: usize,
) -> Result<LatencyReport, ServiceError> {
    let mut report = LatencyReport::new(repetitions);
    for rep in 0..repetitions {
        // A fresh batcher key per repetition keeps batch ids distinct while
        // re-registering identical content, mirroring a client that writes
        // the same dataset ten times.
        let mut seed = [104u8; 32];
        seed[..8].copy_from_slice(&(rep as u64).to_be_bytes());
        let batcher = keypair_from_seed(seed);

        // Writes, in dependency order; labels name the datasets.
        let writes: [(&str, &SigningKey, Command, Value); 7] = [
            ("Register QI", &fixtures.manager, Command::Qi, fixtures.qi.clone()),
            ("Register CW", &fixtures.manager, Command::Cw, fixtures.cw.clone()),
            ("Register WM_plus", &fixtures.manager, Command::Wmp, fixtures.wmp.clone()),
            ("Register WM_minus", &fixtures.manager, Command::Wmm, fixtures.wmm.clone()),
            ("Register E Matrix", &fixtures.scientist, Command::Method, fixtures.inputs.clone()),
            (
                "Rank Compute and Register Rank",
                &fixtures.scientist,
                Command::Qos,
                json!({"purposes": []}),
            ),
            (
                "Audit Verification and Register Result",
                &fixtures.auditor,
                Command::Audit,
                fixtures.audit_args()?,
            ),
        ];
        for (label, signer, command, args) in writes {
            let ms = timed_write(cluster, node, label, signer, &batcher, command, args)?;
            report.write_ms.get_mut(label).expect("label is known").push(ms);
        }

        // Reads, one per dataset, answered from committed state.
        let prefix_reads: [(&str, Category); 6] = [
            ("Read QI and Metrics", Category::Qi),
            ("Read ranks", Category::Rankings),
            ("Read WM_plus", Category::WmPlus),
            ("Read WM_minus", Category::WmMinus),
            ("Read E matrix", Category::Evaluation),
            ("Read CW", Category::QiWeights),
        ];
        for (label, category) in prefix_reads {
            let started = Instant::now();
            let entries = cluster
                .read_prefix(node, &category.prefix())
                .map_err(ServiceError::Probe)?;
            let ms = elapsed_ms(started);
            if entries.is_empty() {
                return Err(ServiceError::Probe(format!(
                    "probe read {label:?} found no committed entries"
                )));
            }
            report.read_ms.get_mut(label).expect("label is known").push(ms);
        }

        let rank_address = make_address(Category::Rankings, &fixtures.purpose)?;
        let started = Instant::now();
        let entries = cluster
            .read_address(node, rank_address.as_str())
            .map_err(ServiceError::Probe)?;
        let ms = elapsed_ms(started);
        if entries.is_empty() {
            return Err(ServiceError::Probe(format!(
                "probe read \"Read rank\" found no ranking for {:?}",
                fixtures.purpose
            )));
        }
        report.read_ms.get_mut("Read rank").expect("label is known").push(ms);
    }
    Ok(report)
}
