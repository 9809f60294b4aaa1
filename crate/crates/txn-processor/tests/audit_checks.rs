//! Audit soundness: untampered rounds pass; any single-field tampering of
//! spec, measurements, or stored rankings flips the report to inconsistent.

use ledger_state::{
    keypair_from_seed, make_address, public_key_hex, Batch, Category, GlobalState, SigningKey,
    Transaction,
};
use serde_json::json;
use txn_processor::{
    command_payload, AuditCheck, AuditReport, Command, ExecutionContext, Executor, StoredRanking,
};

struct Net {
    executor: Executor,
    pm: SigningKey,
    ds: SigningKey,
    auditor: SigningKey,
}

impl Net {
    fn new() -> Self {
        let pm = keypair_from_seed([1; 32]);
        let ds = keypair_from_seed([2; 32]);
        let auditor = keypair_from_seed([3; 32]);
        let executor = Executor::from_genesis_settings(&json!({
            "roles": {
                public_key_hex(&pm): "product_manager",
                public_key_hex(&ds): "data_scientist",
                public_key_hex(&auditor): "auditor",
            },
        }))
        .unwrap();
        Net {
            executor,
            pm,
            ds,
            auditor,
        }
    }

    fn submit(&self, state: &mut GlobalState, key: &SigningKey, command: Command, args: serde_json::Value) {
        let txn = Transaction::build(key, vec![], vec![], &command_payload(command, args)).unwrap();
        let batch = Batch::build(key, vec![txn]).unwrap();
        self.executor
            .apply_batch(state, &batch, &ExecutionContext { height: 1 })
            .unwrap();
    }
}

struct Files {
    qi: serde_json::Value,
    cw: serde_json::Value,
    wmp: serde_json::Value,
    wmm: serde_json::Value,
    inputs: serde_json::Value,
}

fn files() -> Files {
    Files {
        qi: json!({
            "fidelity": {
                "pcd": {"kind": "lower_better"},
                "crsr": {"kind": "closer_to_constant", "constant": 1.0},
            },
            "utility": {"acc": {"kind": "higher_better"}},
        }),
        cw: json!({"p": {"fidelity": 0.5, "utility": 0.5}}),
        wmp: json!({"p": {"pcd": 0.8, "crsr": 0.2}}),
        wmm: json!({"p": {"acc": 1.0}}),
        inputs: json!({"generators": [
            {"name": "g1", "metrics": {"pcd": 0.1, "crsr": 1.2, "acc": 0.9}},
            {"name": "g2", "metrics": {"pcd": 0.3, "crsr": 1.0, "acc": 0.8}},
            {"name": "g3", "metrics": {"pcd": 0.2, "crsr": 0.7, "acc": 0.7}},
        ]}),
    }
}

/// Registers everything and runs qos; returns the ready-to-audit state.
fn ranked_state(net: &Net, files: &Files) -> GlobalState {
    let mut state = GlobalState::new();
    net.submit(&mut state, &net.pm, Command::Qi, files.qi.clone());
    net.submit(&mut state, &net.pm, Command::Cw, files.cw.clone());
    net.submit(&mut state, &net.pm, Command::Wmp, files.wmp.clone());
    net.submit(&mut state, &net.pm, Command::Wmm, files.wmm.clone());
    net.submit(&mut state, &net.ds, Command::Method, files.inputs.clone());
    net.submit(&mut state, &net.ds, Command::Qos, json!({"purposes": []}));
    state
}

fn audit(net: &Net, state: &mut GlobalState, files: &Files) -> AuditReport {
    let args = json!({"files": {
        "qi": files.qi.to_string(),
        "cw": files.cw.to_string(),
        "wmp": files.wmp.to_string(),
        "wmm": files.wmm.to_string(),
        "inputs": files.inputs.to_string(),
    }});
    net.submit(state, &net.auditor, Command::Audit, args);
    let reports = state.entries_in_category(Category::Audit);
    assert_eq!(reports.len(), 1);
    serde_json::from_str(reports[0].1).unwrap()
}

fn finding_ok(report: &AuditReport, check: AuditCheck) -> bool {
    report
        .findings
        .iter()
        .find(|f| f.check == check)
        .expect("finding present")
        .ok
}

#[test]
fn untampered_round_trip_is_consistent() {
    let net = Net::new();
    let files = files();
    let mut state = ranked_state(&net, &files);
    let report = audit(&net, &mut state, &files);
    assert!(report.is_consistent);
    assert!(report.findings.iter().all(|f| f.ok));
    assert_eq!(report.findings.len(), 3);
}

#[test]
fn flipped_weight_in_auditor_copy_fails_spec_match() {
    let net = Net::new();
    let files = files();
    let mut state = ranked_state(&net, &files);
    let mut tampered = files;
    tampered.wmp = json!({"p": {"pcd": 0.2, "crsr": 0.8}});
    let report = audit(&net, &mut state, &tampered);
    assert!(!report.is_consistent);
    assert!(!finding_ok(&report, AuditCheck::SpecMatch));
}

#[test]
fn tampered_stored_ranking_fails_rank_match() {
    let net = Net::new();
    let files = files();
    let mut state = ranked_state(&net, &files);

    // Tamper with the committed ranking out-of-band: swap two ranks.
    let address = make_address(Category::Rankings, "p").unwrap();
    let mut stored: StoredRanking = serde_json::from_str(state.get(&address).unwrap()).unwrap();
    stored.result.entries[0].rank = 99;
    state.set(
        address,
        ledger_state::canonical_json_string(&stored).unwrap(),
    );

    let report = audit(&net, &mut state, &files);
    assert!(!report.is_consistent);
    assert!(!finding_ok(&report, AuditCheck::RankMatch));
    // The transform was left intact, so the evaluation check still passes.
    assert!(finding_ok(&report, AuditCheck::EvalMatch));
    assert!(finding_ok(&report, AuditCheck::SpecMatch));
}

#[test]
fn tampered_measurement_fails_eval_match() {
    let net = Net::new();
    let files = files();
    let mut state = ranked_state(&net, &files);

    let address = make_address(Category::Evaluation, "g2").unwrap();
    let mut row: serde_json::Value = state.get_json(&address).unwrap().unwrap();
    row["metrics"]["pcd"] = json!(0.31);
    state.set(address, ledger_state::canonical_json_string(&row).unwrap());

    let report = audit(&net, &mut state, &files);
    assert!(!report.is_consistent);
    assert!(!finding_ok(&report, AuditCheck::EvalMatch));
}

#[test]
fn unparseable_file_is_a_failed_finding_not_a_crash() {
    let net = Net::new();
    let files = files();
    let mut state = ranked_state(&net, &files);

    let args = json!({"files": {
        "qi": files.qi.to_string(),
        "cw": files.cw.to_string(),
        "wmp": files.wmp.to_string(),
        "wmm": files.wmm.to_string(),
        "inputs": "{{{ not json",
    }});
    net.submit(&mut state, &net.auditor, Command::Audit, args);
    let reports = state.entries_in_category(Category::Audit);
    let report: AuditReport = serde_json::from_str(reports[0].1).unwrap();

    assert!(!report.is_consistent);
    assert!(!finding_ok(&report, AuditCheck::EvalMatch));
    assert!(finding_ok(&report, AuditCheck::SpecMatch));
    let detail = &report
        .findings
        .iter()
        .find(|f| f.check == AuditCheck::EvalMatch)
        .unwrap()
        .detail;
    assert!(detail.contains("unparseable"));
}

#[test]
fn audit_reports_land_at_distinct_run_ids_per_height() {
    let net = Net::new();
    let files = files();
    let mut state = ranked_state(&net, &files);
    let args = json!({"files": {
        "qi": files.qi.to_string(),
        "cw": files.cw.to_string(),
        "wmp": files.wmp.to_string(),
        "wmm": files.wmm.to_string(),
        "inputs": files.inputs.to_string(),
    }});
    for height in [5, 6] {
        let txn = Transaction::build(
            &net.auditor,
            vec![],
            vec![],
            &command_payload(Command::Audit, args.clone()),
        )
        .unwrap();
        let batch = Batch::build(&net.auditor, vec![txn]).unwrap();
        net.executor
            .apply_batch(&mut state, &batch, &ExecutionContext { height })
            .unwrap();
    }
    assert_eq!(state.entries_in_category(Category::Audit).len(), 2);
}

