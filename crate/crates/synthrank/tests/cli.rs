//! End-to-end CLI runs against the real binary: every invocation is a
//! separate process, so these also prove that a sim:<dir> network persists
//! across invocations via its submission log.

use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};

struct Workbench {
    _root: tempfile::TempDir,
    work_dir: PathBuf,
    key_dir: PathBuf,
}

impl Workbench {
    fn new() -> Self {
        let root = tempfile::tempdir().unwrap();
        let work_dir = root.path().join("work");
        let key_dir = root.path().join("keyring");
        std::fs::create_dir_all(&work_dir).unwrap();
        Workbench {
            work_dir,
            key_dir,
            _root: root,
        }
    }

    /// Runs the binary; returns (exit code, stdout, stderr).
    fn run(&self, args: &[&str]) -> (i32, String, String) {
        let output = Command::new(env!("CARGO_BIN_EXE_synthrank"))
            .args(args)
            .env("SYNTHRANK_KEY_DIR", &self.key_dir)
            .current_dir(&self.work_dir)
            .output()
            .expect("binary runs");
        (
            output.status.code().unwrap_or(-1),
            String::from_utf8_lossy(&output.stdout).into_owned(),
            String::from_utf8_lossy(&output.stderr).into_owned(),
        )
    }

    fn ok(&self, args: &[&str]) -> String {
        let (code, stdout, stderr) = self.run(args);
        assert_eq!(code, 0, "args {args:?}\nstdout:\n{stdout}\nstderr:\n{stderr}");
        stdout
    }

    fn write_file(&self, name: &str, value: &Value) -> String {
        let path = self.work_dir.join(name);
        std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
        name.to_string()
    }
}

fn qi_doc() -> Value {
    json!({
        "fidelity": {
            "pcd": {"kind": "lower_better"},
            "sc": {"kind": "higher_better"},
        },
        "utility": {"acc": {"kind": "higher_better"}},
    })
}

fn cw_doc() -> Value {
    json!({"training": {"fidelity": 0.5, "utility": 0.5}})
}

fn wmp_doc() -> Value {
    json!({"training": {"sc": 0.6, "acc": 0.4}})
}

fn wmm_doc() -> Value {
    json!({"training": {"pcd": 1.0}})
}

fn inputs_doc() -> Value {
    json!({"generators": [
        {"name": "alpha", "metrics": {"pcd": 0.1, "sc": 0.8, "acc": 0.9}},
        {"name": "beta", "metrics": {"pcd": 0.2, "sc": 0.6, "acc": 0.95}},
    ]})
}

/// Writes the demo corpus files and registers everything through a fresh
/// sim network; returns the bench ready for reads.
fn registered_bench() -> Workbench {
    let bench = Workbench::new();
    for role in ["product_manager", "data_scientist", "auditor"] {
        bench.ok(&["keygen", role]);
    }
    bench.ok(&["init", "--url", "sim:net"]);

    let qi = bench.write_file("qi.txt", &qi_doc());
    let cw = bench.write_file("weights.txt", &cw_doc());
    let wmp = bench.write_file("wm_plus.txt", &wmp_doc());
    let wmm = bench.write_file("wm_minus.txt", &wmm_doc());
    let inputs = bench.write_file("inputs.txt", &inputs_doc());
    let compute = bench.write_file("compute.txt", &json!({"purposes": []}));

    let sim = ["--url", "sim:net"];
    let pm = ["--key", "product_manager"];
    let ds = ["--key", "data_scientist"];
    bench.ok(&[&["qi", &qi], &sim[..], &pm[..]].concat());
    bench.ok(&[&["cw", &cw], &sim[..], &pm[..]].concat());
    bench.ok(&[&["wmp", &wmp], &sim[..], &pm[..]].concat());
    bench.ok(&[&["wmm", &wmm], &sim[..], &pm[..]].concat());
    bench.ok(&[&["method", &inputs], &sim[..], &ds[..]].concat());
    bench.ok(&[&["qos", &compute], &sim[..], &ds[..]].concat());
    bench
}

#[test]
fn keygen_writes_pairs_and_refuses_overwrite() {
    let bench = Workbench::new();
    let stdout = bench.ok(&["keygen", "product_manager"]);
    assert!(stdout.contains("public key for product_manager"));
    assert!(bench.key_dir.join("product_manager.priv").exists());
    assert!(bench.key_dir.join("product_manager.pub").exists());

    let (code, _, stderr) = bench.run(&["keygen", "product_manager"]);
    assert_eq!(code, 1);
    assert!(stderr.contains("--force"), "stderr: {stderr}");
    bench.ok(&["keygen", "product_manager", "--force"]);
}

#[test]
fn registration_commits_and_reports_heights() {
    let bench = Workbench::new();
    bench.ok(&["keygen", "product_manager"]);
    bench.ok(&["init", "--url", "sim:net"]);
    let cw = bench.write_file("weights.txt", &cw_doc());

    let stdout = bench.ok(&["cw", &cw, "--url", "sim:net", "--key", "product_manager"]);
    assert!(stdout.contains("accepted "), "stdout: {stdout}");
    assert!(stdout.contains("committed at height 1"), "stdout: {stdout}");

    // Resubmitting identical content is idempotent: the deterministic nonce
    // makes it the same batch, which deduplicates to the original commit.
    let stdout = bench.ok(&["cw", &cw, "--url", "sim:net", "--key", "product_manager"]);
    assert!(stdout.contains("committed at height 1"), "stdout: {stdout}");

    // Different content lands at height 2: the directory carries the chain
    // between invocations.
    let other = bench.write_file("weights2.txt", &json!({"evaluation": {"fidelity": 1.0}}));
    let stdout = bench.ok(&["cw", &other, "--url", "sim:net", "--key", "product_manager"]);
    assert!(stdout.contains("committed at height 2"), "stdout: {stdout}");
}

#[test]
fn write_verbs_demand_a_key() {
    let bench = Workbench::new();
    bench.ok(&["keygen", "product_manager"]);
    bench.ok(&["init", "--url", "sim:net"]);
    let cw = bench.write_file("weights.txt", &cw_doc());
    let (code, _, stderr) = bench.run(&["cw", &cw, "--url", "sim:net"]);
    assert_eq!(code, 1);
    assert!(stderr.contains("--key"), "stderr: {stderr}");
}

#[test]
fn permission_denial_surfaces_the_node_reason() {
    let bench = Workbench::new();
    bench.ok(&["keygen", "product_manager"]);
    bench.ok(&["keygen", "data_scientist"]);
    bench.ok(&["init", "--url", "sim:net"]);
    let cw = bench.write_file("weights.txt", &cw_doc());

    let (code, _, stderr) = bench.run(&["cw", &cw, "--url", "sim:net", "--key", "data_scientist"]);
    assert_eq!(code, 2, "stderr: {stderr}");
    assert!(
        stderr.contains("permission denied: cw requires product_manager"),
        "stderr: {stderr}"
    );
}

#[test]
fn file_schema_violations_name_the_problem() {
    let bench = Workbench::new();
    bench.ok(&["keygen", "data_scientist"]);
    bench.ok(&["init", "--url", "sim:net"]);

    // Wrong top-level shape for inputs.txt.
    let bad = bench.write_file("inputs.txt", &json!({"generator": {}}));
    let (code, _, stderr) = bench.run(&[
        "method", &bad, "--url", "sim:net", "--key", "data_scientist",
    ]);
    assert_eq!(code, 1);
    assert!(stderr.contains("generators"), "stderr: {stderr}");

    // Unparseable JSON carries line/column diagnostics.
    std::fs::write(bench.work_dir.join("broken.txt"), "{\n  broken\n}").unwrap();
    let (code, _, stderr) = bench.run(&[
        "method", "broken.txt", "--url", "sim:net", "--key", "data_scientist",
    ]);
    assert_eq!(code, 1);
    assert!(stderr.contains("line 2"), "stderr: {stderr}");
}

#[test]
fn every_read_verb_round_trips_its_registration() {
    let bench = registered_bench();
    let sim = ["--url", "sim:net"];
    for (verb, expected) in [
        ("qis", qi_doc()),
        ("cws", cw_doc()),
        ("wmps", wmp_doc()),
        ("wmms", wmm_doc()),
        ("methods", inputs_doc()),
    ] {
        let stdout = bench.ok(&[&[verb], &sim[..]].concat());
        let echoed: Value = serde_json::from_str(&stdout)
            .unwrap_or_else(|e| panic!("{verb} printed invalid JSON: {e}\n{stdout}"));
        assert_eq!(echoed, expected, "{verb} round trip");
    }
}

#[test]
fn ranks_output_is_stable_and_diffable() {
    let bench = registered_bench();
    let first = bench.ok(&["ranks", "--url", "sim:net"]);
    let second = bench.ok(&["ranks", "--url", "sim:net"]);
    assert_eq!(first, second, "ranks output must be deterministic");

    let mut lines = first.lines();
    assert_eq!(
        lines.next().unwrap(),
        "purpose\trank\tgenerator\tdesired\tundesired\toverall"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("training\t1\tbeta\t"), "rows: {rows:?}");
    assert!(rows[1].starts_with("training\t2\talpha\t"), "rows: {rows:?}");

    let single = bench.ok(&["rank", "training", "--url", "sim:net"]);
    assert_eq!(single, first, "single-purpose view matches for one purpose");
}

#[test]
fn unknown_purpose_is_a_user_error() {
    let bench = registered_bench();
    let (code, _, stderr) = bench.run(&["rank", "nonexistent_purpose", "--url", "sim:net"]);
    assert_eq!(code, 1);
    assert!(stderr.contains("purpose not found"), "stderr: {stderr}");
}

#[test]
fn audit_prints_report_and_is_consistent_reads_verdict() {
    let bench = registered_bench();
    let stdout = bench.ok(&[
        "audit",
        "qi.txt",
        "weights.txt",
        "wm_plus.txt",
        "wm_minus.txt",
        "inputs.txt",
        "--url",
        "sim:net",
        "--key",
        "auditor",
    ]);
    assert!(stdout.contains("committed at height 7"), "stdout: {stdout}");
    assert!(stdout.contains("run "), "stdout: {stdout}");
    assert!(stdout.contains("isConsistent: true"), "stdout: {stdout}");
    assert!(!stdout.contains("FAIL"), "stdout: {stdout}");

    let verdict = bench.ok(&["isConsistent", "--url", "sim:net"]);
    assert_eq!(verdict.trim(), "true");
}

#[test]
fn is_consistent_without_audits_is_a_user_error() {
    let bench = registered_bench();
    let (code, _, stderr) = bench.run(&["isConsistent", "--url", "sim:net"]);
    assert_eq!(code, 1);
    assert!(stderr.contains("no audit reports"), "stderr: {stderr}");
}

#[test]
fn http_mode_round_trips_against_a_live_listener() {
    let bench = Workbench::new();
    bench.ok(&["keygen", "product_manager"]);
    let public = std::fs::read_to_string(bench.key_dir.join("product_manager.pub")).unwrap();

    // Boot a real listener around a fresh network whose genesis grants the
    // CLI-generated key its role.
    let settings = json!({"roles": {public.trim(): "product_manager"}});
    let cluster = node_service::Cluster::new(
        consensus_pbft::NetworkConfig::honest(4, 1, 99),
        settings,
    )
    .unwrap();
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    std::thread::spawn(move || {
        let mut cluster = cluster;
        let _ = node_service::serve(&mut cluster, 0, listener, None);
    });

    let cw = bench.write_file("weights.txt", &cw_doc());
    let stdout = bench.ok(&[
        "cw",
        &cw,
        "--url",
        &url,
        "--key",
        "product_manager",
        "--poll-interval-ms",
        "10",
    ]);
    assert!(stdout.contains("committed at height 1"), "stdout: {stdout}");

    let echoed = bench.ok(&["cws", "--url", &url]);
    let parsed: Value = serde_json::from_str(&echoed).unwrap();
    assert_eq!(parsed, cw_doc());
}

#[test]
fn unreachable_node_is_a_user_error() {
    let bench = Workbench::new();
    let (code, _, stderr) = bench.run(&["ranks", "--url", "http://127.0.0.1:1"]);
    assert_eq!(code, 1);
    assert!(stderr.contains("cannot reach node"), "stderr: {stderr}");
}
