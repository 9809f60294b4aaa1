//! End-to-end exercises of the node API: submission door checks, status
//! lifecycle, committed-state reads, cross-node agreement, the latency
//! probe, and the optional real-socket mode.

use std::io::{Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};

use consensus_pbft::{BatchStatus, NetworkConfig};
use ledger_state::{Batch, Category, Transaction};
use node_service::{run_latency_probe, Cluster, ProbeFixtures, READ_LABELS, WRITE_LABELS};
use serde_json::{json, Value};
use txn_processor::{command_payload, Command};

fn fixtures() -> ProbeFixtures {
    ProbeFixtures::demo()
}

fn cluster() -> Cluster {
    Cluster::new(NetworkConfig::honest(4, 1, 42), fixtures().genesis_settings()).unwrap()
}

/// A registration batch: category weights for one purpose.
fn cw_batch(purpose: &str) -> Batch {
    let key = fixtures().manager;
    let payload = command_payload(
        Command::Cw,
        json!({purpose: {"fidelity": 0.5, "utility": 0.5}}),
    );
    let txn = Transaction::build(&key, vec![], vec![], &payload).unwrap();
    Batch::build(&key, vec![txn]).unwrap()
}

fn qi_batch() -> Batch {
    let f = fixtures();
    let payload = command_payload(Command::Qi, f.qi.clone());
    let txn = Transaction::build(&f.manager, vec![], vec![], &payload).unwrap();
    Batch::build(&f.manager, vec![txn]).unwrap()
}

#[test]
fn valid_batch_is_accepted_with_its_header_digest() {
    let mut cluster = cluster();
    let batch = cw_batch("training");
    let expected_id = batch.id().unwrap();
    let id = cluster.submit(0, batch).unwrap();
    assert_eq!(id, expected_id);
    assert_eq!(id.len(), 64);
}

#[test]
fn acceptance_does_not_imply_commit() {
    let mut cluster = cluster();
    let id = cluster.submit(0, cw_batch("training")).unwrap();
    // Accepted and pending; consensus has not run yet.
    assert!(matches!(cluster.status(0, &id), BatchStatus::Pending));
    cluster.settle();
    assert!(matches!(
        cluster.status(0, &id),
        BatchStatus::Committed { height: 1 }
    ));
}

#[test]
fn tampered_transaction_signature_is_rejected() {
    let mut cluster = cluster();
    let f = fixtures();
    let payload = command_payload(Command::Cw, json!({"training": {"fidelity": 1.0}}));
    let mut txn = Transaction::build(&f.manager, vec![], vec![], &payload).unwrap();
    let flipped = if txn.signature.starts_with('0') { "f" } else { "0" };
    txn.signature.replace_range(0..1, flipped);
    let batch = Batch::build(&f.manager, vec![txn]).unwrap();

    let reason = cluster.submit(0, batch).unwrap_err();
    assert_eq!(reason, "invalid signature");
    cluster.settle();
    assert_eq!(cluster.simulation().node(0).committed_height(), 0);
}

#[test]
fn duplicate_submission_is_idempotent() {
    let mut cluster = cluster();
    let batch = cw_batch("training");
    let first = cluster.submit(0, batch.clone()).unwrap();
    let second = cluster.submit(1, batch.clone()).unwrap();
    assert_eq!(first, second);
    cluster.settle();
    // Resubmitting after commit is also accepted without a second commit.
    let third = cluster.submit(0, batch).unwrap();
    assert_eq!(first, third);
    cluster.settle();
    for node in cluster.simulation().nodes() {
        assert_eq!(node.committed_height(), 1, "node {}", node.id());
    }
}

#[test]
fn unknown_batch_id_reports_unknown() {
    let cluster = cluster();
    assert!(matches!(
        cluster.status(0, &"ab".repeat(32)),
        BatchStatus::Unknown
    ));
}

#[test]
fn execution_failures_surface_as_invalid_with_reason() {
    let mut cluster = cluster();
    let f = fixtures();
    // Weight outside [0, 1] passes the door checks (well-formed, signed) but
    // fails execution; shows up as Invalid after consensus orders it.
    let payload = command_payload(Command::Cw, json!({"training": {"fidelity": 2.0}}));
    let txn = Transaction::build(&f.manager, vec![], vec![], &payload).unwrap();
    let batch = Batch::build(&f.manager, vec![txn]).unwrap();
    let id = cluster.submit(0, batch).unwrap();
    cluster.settle();
    match cluster.status(0, &id) {
        BatchStatus::Invalid { reason } => assert!(reason.contains("outside [0, 1]")),
        other => panic!("expected Invalid, got {other:?}"),
    }
}

#[test]
fn reads_cover_addresses_prefixes_and_errors() {
    let mut cluster = cluster();
    cluster.submit(0, qi_batch()).unwrap();
    cluster.submit(0, cw_batch("training")).unwrap();
    cluster.submit(0, cw_batch("evaluation")).unwrap();
    cluster.settle();

    // Category read returns every purpose's weights.
    let weights = cluster
        .read_prefix(0, &Category::QiWeights.prefix())
        .unwrap();
    assert_eq!(weights.len(), 2);

    // Single-address read returns that entry, decoded.
    let single = cluster.read_address(0, &weights[0].address).unwrap();
    assert_eq!(single, vec![weights[0].clone()]);
    assert_eq!(single[0].value["weights"]["fidelity"], 0.5);

    // Unknown but well-formed address reads empty.
    let absent = format!("{}{}", Category::Rankings.prefix(), "ab".repeat(32));
    assert_eq!(cluster.read_address(0, &absent).unwrap(), vec![]);

    // Malformed address is an error, not an empty read.
    let err = cluster.read_address(0, "zz-not-an-address").unwrap_err();
    assert!(err.contains("malformed address"), "got: {err}");
}

#[test]
fn reads_never_expose_uncommitted_state() {
    let mut cluster = cluster();
    cluster.submit(0, cw_batch("training")).unwrap();
    // Pending on the serving node, visible nowhere.
    assert_eq!(
        cluster.read_prefix(0, &Category::QiWeights.prefix()).unwrap(),
        vec![]
    );
    cluster.settle();
    assert_eq!(
        cluster
            .read_prefix(0, &Category::QiWeights.prefix())
            .unwrap()
            .len(),
        1
    );
}

#[test]
fn nodes_at_the_same_height_read_identically() {
    let mut cluster = cluster();
    cluster.submit(0, qi_batch()).unwrap();
    cluster.submit(2, cw_batch("training")).unwrap();
    cluster.settle();

    let heights: Vec<u64> = cluster
        .simulation()
        .nodes()
        .iter()
        .map(|n| n.committed_height())
        .collect();
    assert_eq!(heights, vec![2, 2, 2, 2]);

    let reference = cluster.read_prefix(0, "").unwrap();
    assert!(!reference.is_empty());
    for node in 1..cluster.node_count() {
        assert_eq!(cluster.read_prefix(node, "").unwrap(), reference);
    }
}

#[test]
fn latency_probe_collects_ten_samples_per_label() {
    let mut cluster = cluster();
    let fixtures = fixtures();
    let report = run_latency_probe(&mut cluster, 0, &fixtures, 10).unwrap();

    assert_eq!(report.repetitions, 10);
    for label in WRITE_LABELS {
        let samples = &report.write_ms[label];
        assert_eq!(samples.len(), 10, "{label}");
        assert!(samples.iter().all(|&ms| ms > 0.0), "{label}");
    }
    for label in READ_LABELS {
        let samples = &report.read_ms[label];
        assert_eq!(samples.len(), 10, "{label}");
        assert!(samples.iter().all(|&ms| ms > 0.0), "{label}");
    }

    // The write-vs-read comparison is reported, never asserted.
    println!("{}", report.summary());
    let exported: Value = serde_json::from_str(&report.to_json().unwrap()).unwrap();
    assert_eq!(exported["repetitions"], 10);
    assert_eq!(exported["write_ms"].as_object().unwrap().len(), 7);

    // Ten repetitions of seven writes actually went through consensus.
    assert_eq!(cluster.simulation().node(0).committed_height(), 70);

    // The rank computation the probe triggered is readable and ordered.
    let ranks = cluster.read_prefix(0, &Category::Rankings.prefix()).unwrap();
    assert_eq!(ranks.len(), 1);
    assert_eq!(ranks[0].value["result"]["entries"][0]["generator"], "beta");
}

#[test]
fn zero_repetitions_yield_empty_sample_sets() {
    let mut cluster = cluster();
    let report = run_latency_probe(&mut cluster, 0, &fixtures(), 0).unwrap();
    assert!(report.write_ms.values().all(Vec::is_empty));
    assert!(report.read_ms.values().all(Vec::is_empty));
    assert_eq!(report.write_ms.len(), 7);
    assert_eq!(report.read_ms.len(), 7);
}

/// One blocking HTTP/1.1 exchange against the listener.
fn http_call(addr: SocketAddr, method: &str, target: &str, body: &str) -> (u16, Value) {
    let mut stream = TcpStream::connect(addr).unwrap();
    write!(
        stream,
        "{method} {target} HTTP/1.1\r\nHost: test\r\nContent-Length: {}\r\n\r\n{body}",
        body.len()
    )
    .unwrap();
    let mut response = String::new();
    stream.read_to_string(&mut response).unwrap();
    let code: u16 = response.split_whitespace().nth(1).unwrap().parse().unwrap();
    let split = response.find("\r\n\r\n").unwrap() + 4;
    (code, serde_json::from_str(&response[split..]).unwrap())
}

#[test]
fn socket_mode_serves_the_same_api() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let cluster = cluster();
    let server = std::thread::spawn(move || {
        let mut cluster = cluster;
        node_service::serve(&mut cluster, 0, listener, Some(4)).unwrap();
    });

    let batch = cw_batch("training");
    let body = serde_json::to_string(&batch).unwrap();
    let (code, reply) = http_call(addr, "POST", "/batches", &body);
    assert_eq!(code, 202);
    assert_eq!(reply["id"], batch.id().unwrap().as_str());

    // The server settles between requests, so the batch has committed by now.
    let id = reply["id"].as_str().unwrap();
    let (code, reply) = http_call(addr, "GET", &format!("/batch_statuses?id={id}"), "");
    assert_eq!(code, 200);
    assert_eq!(reply["status"]["status"], "committed");
    assert_eq!(reply["status"]["height"], 1);

    let prefix = Category::QiWeights.prefix();
    let (code, reply) = http_call(addr, "GET", &format!("/state?prefix={prefix}"), "");
    assert_eq!(code, 200);
    assert_eq!(reply["entries"].as_array().unwrap().len(), 1);

    let (code, reply) = http_call(addr, "GET", "/unknown", "");
    assert_eq!(code, 404);
    assert!(reply["error"].as_str().unwrap().contains("no route"));

    server.join().unwrap();
}
