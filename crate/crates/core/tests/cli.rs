mod support;

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use support::mock_node::{MockNode, CHAIN_ID, CONTRACT, DEV_KEY};
use support::repo_root;

const ENV_KEYS: &[&str] = &[
    "STORE", "BACKEND", "AUDITOR", "RULESET", "BENCH", "CORPUS", "SEED", "RPC_URL", "CHAIN_ID", "CONTRACT",
    "PRIVATE_KEY",
];

fn cmd() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_anchorscan"));
    for k in ENV_KEYS {
        c.env_remove(format!("ANCHORSCAN_{k}"));
    }
    c
}

fn run(store: &Path, args: &[&str]) -> Output {
    cmd().arg("--store").arg(store).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}\n{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr)))
}

fn bank() -> std::path::PathBuf {
    repo_root().join("fixtures/targets/contract-000-bank.json")
}

#[test]
fn scan_reproduces_golden_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["--json", "scan", bank().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let body = json(&out);
    assert_eq!(body["ok"], true);
    let result = &body["results"][0];
    let written = std::fs::read(result["report_path"].as_str().unwrap()).unwrap();
    let golden = std::fs::read(repo_root().join("fixtures/reports/contract-000-bank.report.json")).unwrap();
    assert_eq!(written, golden);
    assert_eq!(result["digest"], anchorscan::Digest::of(&golden).to_hex());
    assert_eq!(result["tx"]["status"]["state"], "propagated");
    assert_eq!(result["findings"], 1);
}

#[test]
fn verify_detects_tampering_and_unlogged_files() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("store");
    let out = run(&store, &["--json", "scan", bank().to_str().unwrap(), "--settle"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let body = json(&out);
    assert_eq!(body["results"][0]["tx"]["status"]["state"], "confirmed");
    let path = body["results"][0]["report_path"].as_str().unwrap().to_owned();

    assert_eq!(run(&store, &["verify", "--all"]).status.code(), Some(0));
    assert_eq!(run(&store, &["verify", &path]).status.code(), Some(0));

    // A canonical report anchored on a different ledger.
    let other = dir.path().join("other");
    let web = repo_root().join("fixtures/targets/web-000.json");
    let out = run(&other, &["--json", "scan", web.to_str().unwrap()]);
    let foreign = json(&out)["results"][0]["report_path"].as_str().unwrap().to_owned();
    let out = run(&store, &["--json", "verify", &foreign]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["verdicts"][0]["state"]["state"], "not_logged");

    // Outside the store there is no recorded digest, but non-canonical
    // bytes cannot be a genuine report.
    let copy = dir.path().join("copy.json");
    let mut bytes = std::fs::read(&path).unwrap();
    bytes.push(b' ');
    std::fs::write(&copy, &bytes).unwrap();
    let out = run(&store, &["--json", "verify", copy.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["verdicts"][0]["state"]["expected"], Value::Null);

    std::fs::write(&path, &bytes).unwrap();
    let out = run(&store, &["--json", "verify", "--all"]);
    assert_eq!(out.status.code(), Some(2));
    let v = &json(&out)["verdicts"][0]["state"];
    assert_eq!(v["state"], "tampered");
    assert_ne!(v["expected"], v["actual"]);
    assert_eq!(run(&store, &["verify", &path]).status.code(), Some(2));
}

#[test]
fn rescan_after_confirmation_links_existing_anchor() {
    let dir = tempfile::tempdir().unwrap();
    let target = bank();
    assert_eq!(run(dir.path(), &["scan", target.to_str().unwrap()]).status.code(), Some(0));
    let index_before = std::fs::read(dir.path().join("index.json")).unwrap();
    assert_eq!(run(dir.path(), &["ledger", "settle"]).status.code(), Some(0));
    let out = run(dir.path(), &["--json", "scan", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["results"][0];
    assert_eq!(r["anchor"]["state"], "already_anchored");
    assert_eq!(r["note"], "already anchored");
    assert_eq!(r["tx"]["status"]["reason"], "Hash already exists");
    // Settle refreshed the snapshot; the rerun leaves the entry alone.
    let index: Value = serde_json::from_slice(&std::fs::read(dir.path().join("index.json")).unwrap()).unwrap();
    let entry = index.as_object().unwrap().values().next().unwrap();
    assert_eq!(entry["anchor"]["state"], "submitted");
    assert_eq!(entry["tx"]["status"]["state"], "confirmed");
    assert_ne!(std::fs::read(dir.path().join("index.json")).unwrap(), index_before);
}

#[test]
fn malformed_fixture_aborts_before_any_mutation() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, br#"{"target_id": "x", "kind": "web_endpoint_set", "captured_at": 1, "endpoints": [{"path": "/", "signals": ["nope"]}]}"#).unwrap();
    let store = dir.path().join("store");
    let out = run(&store, &["--json", "scan", bank().to_str().unwrap(), bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"]["kind"], "fixture");
    assert!(!store.exists());
}

#[test]
fn ledger_inspect_log_and_duplicate() {
    let dir = tempfile::tempdir().unwrap();
    let d = "11".repeat(32);
    let out = run(dir.path(), &["--json", "ledger", "inspect", &d]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["entry"], Value::Null);

    let out = run(dir.path(), &["--json", "log", &d]);
    assert_eq!(out.status.code(), Some(0));
    let tx_id = json(&out)["tx"]["tx_id"].as_str().unwrap().to_owned();
    assert_eq!(run(dir.path(), &["ledger", "advance", "60000"]).status.code(), Some(0));

    let out = run(dir.path(), &["--json", "ledger", "tx", &tx_id]);
    assert_eq!(json(&out)["tx"]["status"]["state"], "confirmed");
    let out = run(dir.path(), &["--json", "ledger", "inspect", &d]);
    assert_eq!(out.status.code(), Some(0));
    let entry = &json(&out)["entry"];
    assert_eq!(entry["report_hash"], d);
    assert_eq!(entry["verified"], false);
    assert_eq!(entry["auditor"], "0x5ca1ab1e00000000000000000000000000000001");

    let out = run(dir.path(), &["--json", "log", &d]);
    assert_eq!(out.status.code(), Some(5));
    let body = json(&out);
    assert_eq!(body["error"]["kind"], "reverted");
    assert_eq!(body["error"]["message"], "Hash already exists");

    let status = json(&run(dir.path(), &["--json", "ledger", "status"]));
    assert_eq!(status["entries"], 1);
    assert_eq!(status["transactions"], 2);
}

#[test]
fn usage_errors_exit_one_with_json_envelope() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["--json", "frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    let body = json(&out);
    assert_eq!((body["ok"].clone(), body["exit_code"].clone()), (Value::Bool(false), Value::from(1)));
    assert_eq!(run(dir.path(), &["verify"]).status.code(), Some(1));
    assert_eq!(run(dir.path(), &["ledger", "inspect", "zz"]).status.code(), Some(1));
    assert_eq!(cmd().arg("--help").output().unwrap().status.code(), Some(0));
    assert_eq!(cmd().arg("--version").output().unwrap().status.code(), Some(0));
    let out = cmd().args(["--config", "/nonexistent.toml", "--json", "ledger", "status"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"]["kind"], "config");
}

#[test]
fn read_only_commands_do_not_create_the_store() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("store");
    assert_eq!(run(&store, &["ledger", "status"]).status.code(), Some(0));
    assert_eq!(run(&store, &["verify", "--all"]).status.code(), Some(0));
    assert!(!store.exists());
}

#[test]
fn metrics_on_shipped_corpus() {
    let out = cmd().args(["--json", "metrics", "--corpus"]).arg(repo_root().join("fixtures")).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let m = json(&out);
    assert_eq!((m["tp"].as_u64(), m["fp"].as_u64(), m["fn"].as_u64()), (Some(1599), Some(451), Some(351)));
    assert_eq!(m["precision"], "0.7800");
    assert_eq!(m["recall"], "0.8200");
    assert_eq!(m["f1"], "0.7995");
    assert_eq!(m["targets"], 150);
}

#[test]
fn bench_is_seeded_and_reproducible() {
    let a = cmd().args(["--json", "--seed", "5", "bench", "--runs", "30"]).output().unwrap();
    let b = cmd().args(["--json", "--seed", "5", "bench", "--runs", "30"]).output().unwrap();
    assert_eq!(a.status.code(), Some(0));
    let (ja, jb) = (json(&a), json(&b));
    assert_eq!(ja["overhead"], jb["overhead"]);
    assert_eq!(ja["overhead"]["runs"], 30);
    assert_eq!(ja["overhead"]["seed"], 5);
    assert_eq!(ja["latency"]["n"], 30);
    assert_eq!(run(Path::new("/tmp"), &["bench", "--runs", "10"]).status.code(), Some(1));
}

#[test]
fn config_file_and_env_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("anchorscan.toml");
    std::fs::write(&cfg, "store = \"from-file\"\n").unwrap();
    let status = |extra: &[(&str, &str)], flags: &[&str]| {
        let mut c = cmd();
        c.arg("--config").arg(&cfg).args(flags).args(["--json", "ledger", "status"]);
        for (k, v) in extra {
            c.env(k, v);
        }
        json(&c.output().unwrap())["state_file"].as_str().unwrap().to_owned()
    };
    assert!(status(&[], &[]).starts_with(dir.path().join("from-file").to_str().unwrap()));
    assert!(status(&[("ANCHORSCAN_STORE", "/tmp/from-env")], &[]).starts_with("/tmp/from-env"));
    assert!(status(&[("ANCHORSCAN_STORE", "/tmp/from-env")], &["--store", "/tmp/from-flag"]).starts_with("/tmp/from-flag"));
}

fn rpc_cmd(node: &MockNode, store: &Path) -> Command {
    let mut c = cmd();
    c.arg("--store").arg(store).args(["--backend", "rpc"]);
    c.env("ANCHORSCAN_RPC_URL", node.url())
        .env("ANCHORSCAN_CHAIN_ID", CHAIN_ID.to_string())
        .env("ANCHORSCAN_CONTRACT", CONTRACT.to_string())
        .env("ANCHORSCAN_PRIVATE_KEY", DEV_KEY);
    c
}

#[test]
fn rpc_backend_end_to_end() {
    let node = MockNode::start(true);
    let dir = tempfile::tempdir().unwrap();
    let out = rpc_cmd(&node, dir.path()).args(["--json", "scan", "--settle"]).arg(bank()).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let r = &json(&out)["results"][0];
    assert_eq!(r["tx"]["status"]["state"], "confirmed");
    assert_eq!(r["tx"]["auditor"], "0xf39fd6e51aad88f6f4ce6ab8827279cfffb92266");
    assert_eq!(node.events().len(), 1);

    let out = rpc_cmd(&node, dir.path()).args(["verify", "--all"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let out = rpc_cmd(&node, dir.path()).args(["--json", "ledger", "settle"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(json(&out)["error"]["message"].as_str().unwrap().contains("sim backend"));

    let out = rpc_cmd(&node, dir.path()).args(["--json", "scan"]).arg(bank()).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["results"][0]["anchor"]["state"], "already_anchored");
    assert_eq!(node.events().len(), 1);
}

#[test]
fn unreachable_node_is_unverifiable_not_tampered() {
    let node = MockNode::start(true);
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(rpc_cmd(&node, dir.path()).arg("scan").arg(bank()).output().unwrap().status.code(), Some(0));
    let out = cmd()
        .arg("--store")
        .arg(dir.path())
        .args(["--backend", "rpc", "--json", "verify", "--all"])
        .env("ANCHORSCAN_RPC_URL", "http://127.0.0.1:9")
        .env("ANCHORSCAN_CHAIN_ID", CHAIN_ID.to_string())
        .env("ANCHORSCAN_CONTRACT", CONTRACT.to_string())
        .env("ANCHORSCAN_PRIVATE_KEY", DEV_KEY)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(json(&out)["verdicts"][0]["state"], "unverifiable");
}

#[test]
fn rpc_scan_without_key_is_a_config_error() {
    let node = MockNode::start(true);
    let dir = tempfile::tempdir().unwrap();
    let out = rpc_cmd(&node, dir.path()).env_remove("ANCHORSCAN_PRIVATE_KEY").args(["--json", "scan"]).arg(bank()).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"]["kind"], "config");
}

#[test]
fn node_down_during_scan_exits_five_and_keeps_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = cmd()
        .arg("--store")
        .arg(dir.path())
        .args(["--backend", "rpc", "--json", "scan"])
        .arg(bank())
        .env("ANCHORSCAN_RPC_URL", "http://127.0.0.1:9")
        .env("ANCHORSCAN_CHAIN_ID", CHAIN_ID.to_string())
        .env("ANCHORSCAN_CONTRACT", CONTRACT.to_string())
        .env("ANCHORSCAN_PRIVATE_KEY", DEV_KEY)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(5));
    let body = json(&out);
    assert_eq!(body["error"]["kind"], "ledger");
    let r = &body["error"]["details"]["results"][0];
    assert_eq!(r["anchor"]["state"], "submit_failed");
    assert!(Path::new(r["report_path"].as_str().unwrap()).exists());
}
