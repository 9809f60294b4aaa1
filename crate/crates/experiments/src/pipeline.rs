//! Drives the stack under test: a seeded four-node simulation reached
//! through the client command layer, plus direct cluster helpers for the
//! fault and tamper drills that need node-level access.
//!
//! Role keys are fixed, so a run is a pure function of the network seed:
//! identical seeds produce identical batches, blocks, and state roots.

use std::collections::BTreeMap;
use std::time::Duration;

use analytics::RankVector;
use consensus_pbft::NetworkConfig;
use ledger_state::{
    canonical_json_string, keypair_from_seed, public_key_hex, Batch, SigningKey, Transaction,
};
use node_service::{BatchStatus, Cluster, ProbeFixtures};
use ranking_core::RankingResult;
use serde_json::{json, Value};
use synthrank::commands::{self, Context};
use synthrank::endpoint::SimEndpoint;
use tempfile::TempDir;
use txn_processor::{command_payload, AuditFiles, Command};

use crate::corpus::{Corpus, PurposeGroup};
use crate::error::ExperimentError;

/// The three role keys every run seeds into genesis.
pub struct Roles {
    pub manager: SigningKey,
    pub scientist: SigningKey,
    pub auditor: SigningKey,
}

/// Which role signs a submission.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoleKey {
    Manager,
    Scientist,
    Auditor,
}

impl Roles {
    /// Fixed seeds, so batch ids — and therefore state roots — are
    /// reproducible across runs.
    pub fn deterministic() -> Self {
        Roles {
            manager: keypair_from_seed([101; 32]),
            scientist: keypair_from_seed([102; 32]),
            auditor: keypair_from_seed([103; 32]),
        }
    }

    /// The signing key for `which`.
    pub fn key(&self, which: RoleKey) -> &SigningKey {
        match which {
            RoleKey::Manager => &self.manager,
            RoleKey::Scientist => &self.scientist,
            RoleKey::Auditor => &self.auditor,
        }
    }

    /// Genesis role table granting each key its role.
    pub fn genesis_settings(&self) -> Value {
        json!({"roles": {
            public_key_hex(&self.manager): "product_manager",
            public_key_hex(&self.scientist): "data_scientist",
            public_key_hex(&self.auditor): "auditor",
        }})
    }
}

/// A one-transaction batch signed by `key`.
pub fn command_batch(
    key: &SigningKey,
    command: Command,
    args: Value,
) -> Result<Batch, ExperimentError> {
    let payload = command_payload(command, args);
    let txn = Transaction::build(key, vec![], vec![], &payload)
        .map_err(|e| ExperimentError::Pipeline(format!("cannot build transaction: {e}")))?;
    Batch::build(key, vec![txn])
        .map_err(|e| ExperimentError::Pipeline(format!("cannot build batch: {e}")))
}

/// Submits `batch` at `node`, settles consensus, and demands `Committed`.
/// Returns the commit height.
pub fn submit_committed(
    cluster: &mut Cluster,
    node: usize,
    batch: &Batch,
) -> Result<u64, ExperimentError> {
    let id = cluster
        .submit(node, batch.clone())
        .map_err(ExperimentError::Pipeline)?;
    cluster.settle();
    match cluster.status(node, &id) {
        BatchStatus::Committed { height } => Ok(height),
        status => Err(ExperimentError::Pipeline(format!(
            "batch {id} did not commit: {status:?}"
        ))),
    }
}

/// The registration sequence for one purpose group, in dependency order:
/// indicators, category weights, metric weights (sides with content only),
/// measurements, then the ranking computation over every purpose.
pub fn group_registrations(
    corpus: &Corpus,
    group: &PurposeGroup,
) -> Result<Vec<(RoleKey, Command, Value)>, ExperimentError> {
    let mut steps = vec![
        (RoleKey::Manager, Command::Qi, corpus.qi_file()),
        (RoleKey::Manager, Command::Cw, serde_json::to_value(&group.cw)?),
    ];
    if !group.wmp.is_empty() {
        steps.push((RoleKey::Manager, Command::Wmp, serde_json::to_value(&group.wmp)?));
    }
    if !group.wmm.is_empty() {
        steps.push((RoleKey::Manager, Command::Wmm, serde_json::to_value(&group.wmm)?));
    }
    steps.push((RoleKey::Scientist, Command::Method, corpus.inputs_file()));
    steps.push((RoleKey::Manager, Command::Qos, json!({"purposes": []})));
    Ok(steps)
}

/// Runs a whole group's registrations through consensus on a bare cluster.
pub fn register_group_on_cluster(
    cluster: &mut Cluster,
    roles: &Roles,
    corpus: &Corpus,
    group: &PurposeGroup,
) -> Result<(), ExperimentError> {
    for (role, command, args) in group_registrations(corpus, group)? {
        let batch = command_batch(roles.key(role), command, args)?;
        submit_committed(cluster, 0, &batch)?;
    }
    Ok(())
}

/// The five audit file texts describing `group`, in canonical form — the
/// texts an auditor who trusts the corpus would hand to the audit verb.
pub fn audit_texts_for_group(
    corpus: &Corpus,
    group: &PurposeGroup,
) -> Result<AuditFiles, ExperimentError> {
    Ok(AuditFiles {
        qi: canonical_json_string(&corpus.qi_file())?,
        cw: canonical_json_string(&serde_json::to_value(&group.cw)?)?,
        wmp: canonical_json_string(&serde_json::to_value(&group.wmp)?)?,
        wmm: canonical_json_string(&serde_json::to_value(&group.wmm)?)?,
        inputs: canonical_json_string(&corpus.inputs_file())?,
    })
}

/// Probe fixtures wired to a corpus group, for the latency harness.
pub fn probe_fixtures(corpus: &Corpus, group: &PurposeGroup, purpose: &str) -> ProbeFixtures {
    let roles = Roles::deterministic();
    ProbeFixtures {
        manager: roles.manager,
        scientist: roles.scientist,
        auditor: roles.auditor,
        qi: corpus.qi_file(),
        cw: serde_json::to_value(&group.cw).expect("weights are plain JSON"),
        wmp: serde_json::to_value(&group.wmp).expect("weights are plain JSON"),
        wmm: serde_json::to_value(&group.wmm).expect("weights are plain JSON"),
        inputs: corpus.inputs_file(),
        purpose: purpose.to_string(),
    }
}

/// A four-node simulation reached exclusively through the client command
/// layer — the same code path the command-line binary exercises.
pub struct CliPipeline {
    _dir: TempDir,
    pub ctx: Context,
    pub roles: Roles,
}

impl CliPipeline {
    /// Initializes a fresh network (n = 4, f = 1) under `seed`.
    pub fn new(seed: u64) -> Result<Self, ExperimentError> {
        let roles = Roles::deterministic();
        let config = NetworkConfig::honest(4, 1, seed);
        let dir = TempDir::new()?;
        SimEndpoint::init(dir.path(), &config, &roles.genesis_settings(), false)?;
        let api = SimEndpoint::open(dir.path())?;
        Ok(CliPipeline {
            _dir: dir,
            ctx: Context {
                api: Box::new(api),
                timeout: Duration::from_secs(30),
                poll_interval: Duration::from_millis(1),
            },
            roles,
        })
    }

    /// Submits one command under `role` and waits for commit, quietly.
    pub fn submit(
        &mut self,
        role: RoleKey,
        command: Command,
        args: Value,
    ) -> Result<u64, ExperimentError> {
        let key = self.roles.key(role);
        Ok(commands::submit_and_wait(&mut self.ctx, key, command, args)?)
    }

    /// Registers a whole group and computes its rankings.
    pub fn register_group(
        &mut self,
        corpus: &Corpus,
        group: &PurposeGroup,
    ) -> Result<(), ExperimentError> {
        for (role, command, args) in group_registrations(corpus, group)? {
            self.submit(role, command, args)?;
        }
        Ok(())
    }

    /// Every stored ranking, keyed by purpose.
    pub fn rankings(&mut self) -> Result<BTreeMap<String, RankingResult>, ExperimentError> {
        Ok(commands::fetch_rankings(&mut self.ctx)?
            .into_iter()
            .map(|stored| (stored.purpose, stored.result))
            .collect())
    }
}

/// Roster-ordered rank vector from a ranking result.
pub fn rank_vector(corpus: &Corpus, result: &RankingResult) -> Result<RankVector, ExperimentError> {
    let ranks = corpus
        .generators
        .iter()
        .map(|g| {
            result.rank_of(g).ok_or_else(|| {
                ExperimentError::Scenario(format!("generator {g} missing from a ranking"))
            })
        })
        .collect::<Result<Vec<u32>, _>>()?;
    Ok(RankVector::new(corpus.generators.clone(), ranks)?)
}

/// Roster-ordered rank vector from the expert ground truth.
pub fn ground_truth_vector(corpus: &Corpus, purpose: &str) -> Result<RankVector, ExperimentError> {
    Ok(RankVector::new(
        corpus.generators.clone(),
        corpus.ground_truth_ranks(purpose)?,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::load_corpus;

    #[test]
    fn cli_pipeline_registers_and_ranks_a_group() {
        let corpus = load_corpus().unwrap();
        let group = corpus.group("correctness").unwrap();
        let mut pipeline = CliPipeline::new(11).unwrap();
        pipeline.register_group(&corpus, group).unwrap();
        let rankings = pipeline.rankings().unwrap();
        assert_eq!(
            rankings.keys().cloned().collect::<Vec<_>>(),
            vec!["A", "B", "C"]
        );
    }

    #[test]
    fn cluster_helpers_commit_the_same_group() {
        let corpus = load_corpus().unwrap();
        let group = corpus.group("correctness").unwrap();
        let roles = Roles::deterministic();
        let mut cluster =
            Cluster::new(NetworkConfig::honest(4, 1, 11), roles.genesis_settings()).unwrap();
        register_group_on_cluster(&mut cluster, &roles, &corpus, group).unwrap();
        let entries = cluster
            .read_prefix(0, &ledger_state::Category::Rankings.prefix())
            .unwrap();
        assert_eq!(entries.len(), 3);
    }

    #[test]
    fn rank_vectors_align_with_the_roster() {
        let corpus = load_corpus().unwrap();
        let truth = ground_truth_vector(&corpus, "A").unwrap();
        assert_eq!(truth.rank_of("mice_lr"), Some(1));
        assert_eq!(truth.rank_of("mc_medgan"), Some(8));
    }
}
