// Copyright 2026 the TinySol Authors
// SPDX-License-Identifier: Apache-2.0 OR MIT

//! CLI acceptance: the limitation negatives must be rejected by `check` with
//! their designated diagnostics, and the command surfaces (run, trace, bound,
//! snapshots, conformance) must behave as documented.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tinysol"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn check_rejects(file: &str, diagnostic: &str) {
    let out = run(&["check", data(file).to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(1),
        "{file}: expected exit 1, stderr: {}",
        stderr(&out)
    );
    assert!(
        stderr(&out).contains(diagnostic),
        "{file}: expected diagnostic `{diagnostic}`, got: {}",
        stderr(&out)
    );
}

#[test]
fn criterion_8_limitation_negatives() {
    check_rejects("recursive.tsol", "BodyExceedsDeclaredBound");
    check_rejects("mutual.tsol", "BodyExceedsDeclaredBound");
    check_rejects("increment.tsol", "TypeMismatch");
    check_rejects("unbounded.tsol", "UnboundedLoopGuard");
    println!(
        "ACCEPTANCE 8 limitation-negatives: PASS (recursion, mutual recursion, bounded increment, unbounded guard)"
    );
}

#[test]
fn check_accepts_well_typed_program() {
    let out = run(&["check", data("good.tsol").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(
        text.contains("C.f: declared_n=20 computed_n=1 min_gas=23"),
        "got: {text}"
    );
}

#[test]
fn check_json_report_shape() {
    let out = run(&["check", "--json", data("good.tsol").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["ok"], serde_json::Value::Bool(true));
    assert_eq!(
        v["contracts"]["C"]["f"]["declared_n"],
        serde_json::json!(20)
    );
    assert_eq!(v["contracts"]["C"]["f"]["computed_n"], serde_json::json!(1));
    assert_eq!(v["contracts"]["C"]["f"]["min_gas"], serde_json::json!(23));
}

#[test]
fn parse_error_exits_2() {
    let dir = std::env::temp_dir().join(format!("tinysol-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.tsol");
    std::fs::write(&bad, "contract C { this.balance := 5 }").unwrap();
    let out = run(&["check", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
    let missing = dir.join("missing.tsol");
    let out = run(&["run", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_reports_receipts_and_final_state() {
    let out = run(&["run", "--json", data("good.tsol").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    let receipts = v["receipts"].as_array().unwrap();
    assert_eq!(receipts.len(), 1);
    assert_eq!(receipts[0]["outcome"], serde_json::json!("done"));
    assert_eq!(receipts[0]["gas_used"], serde_json::json!(2));
    // 100 - 1 transferred - 2 gas.
    assert_eq!(v["state"]["A"]["balance"], serde_json::json!(97));
    assert_eq!(v["state"]["C"]["balance"], serde_json::json!(1));
}

#[test]
fn run_exits_zero_on_transaction_exceptions() {
    let out = run(&["run", "--json", data("throwing.tsol").to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "exceptions are defined semantics"
    );
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(
        v["receipts"][0]["outcome"],
        serde_json::json!("exception:pge")
    );
    // Rollback: only the gas burn shows (call + skip; seq and throw free).
    assert_eq!(v["receipts"][0]["gas_used"], serde_json::json!(2));
    assert_eq!(v["state"]["A"]["balance"], serde_json::json!(48));
    assert_eq!(v["state"]["C"]["balance"], serde_json::json!(0));
}

#[test]
fn multi_transaction_scenario_with_mid_chain_rollback() {
    let out = run(&["check", data("bank.tsol").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));

    let out = run(&["run", "--json", data("bank.tsol").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    let outcomes: Vec<&str> = v["receipts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["outcome"].as_str().unwrap())
        .collect();
    assert_eq!(outcomes, vec!["done", "exception:pge", "done"]);
    // The failed withdrawal burned its gas but left the bank untouched; the
    // successful one paid the recorded owner.
    assert_eq!(v["state"]["Alice"]["balance"], serde_json::json!(98));
    assert_eq!(v["state"]["Bob"]["balance"], serde_json::json!(94));
    assert_eq!(v["state"]["Bank"]["balance"], serde_json::json!(0));
    assert_eq!(v["state"]["Bank"]["owner"], serde_json::json!("Alice"));
}

#[test]
fn trace_lists_rules_per_step() {
    let out = run(&["trace", data("good.tsol").to_str().unwrap(), "--tx", "0"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let rules: Vec<String> = stdout(&out)
        .lines()
        .map(|l| {
            let v: serde_json::Value = serde_json::from_str(l).unwrap();
            v["rule"].as_str().unwrap().to_string()
        })
        .collect();
    assert_eq!(rules, vec!["ss-call", "ss-skip", "ss-return"]);
}

#[test]
fn trace_shows_starvation_and_exceptions() {
    let dir = std::env::temp_dir().join(format!("tinysol-trace-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("starved.tsol");
    std::fs::write(
        &file,
        "contract C { f() { skip } } contract A { field balance := 50; } A->C.f():(0,1)",
    )
    .unwrap();
    let out = run(&["trace", file.to_str().unwrap(), "--tx", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let lines: Vec<serde_json::Value> = stdout(&out)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.last().unwrap()["rule"], serde_json::json!("ss-oog"));
    assert_eq!(lines.last().unwrap()["exception"], serde_json::json!("oog"));

    let out = run(&[
        "trace",
        data("throwing.tsol").to_str().unwrap(),
        "--tx",
        "0",
    ]);
    let last_line = stdout(&out);
    let last: serde_json::Value = serde_json::from_str(last_line.lines().last().unwrap()).unwrap();
    assert_eq!(last["exception"], serde_json::json!("pge"));
}

#[test]
fn trace_index_out_of_range() {
    let out = run(&["trace", data("good.tsol").to_str().unwrap(), "--tx", "7"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("out of range"));
}

#[test]
fn bound_for_method_and_transaction() {
    let out = run(&["bound", data("good.tsol").to_str().unwrap(), "C.f"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["declared_n"], serde_json::json!(20));
    assert_eq!(v["call_bound"], serde_json::json!(22));
    assert_eq!(v["min_gas"], serde_json::json!(23));

    let out = run(&["bound", data("good.tsol").to_str().unwrap(), "--tx", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["call_bound"], serde_json::json!(22));
    assert_eq!(v["min_gas"], serde_json::json!(23));
}

/// The corollary, end to end through the CLI: `check`, then `run` with the
/// reported min_gas; the outcome must not be out-of-gas.
#[test]
fn check_then_run_at_reported_min_gas_never_oog() {
    let out = run(&["bound", data("good.tsol").to_str().unwrap(), "C.f"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    let min_gas = v["min_gas"]
        .as_u64()
        .or_else(|| v["min_gas"].as_str()?.parse().ok())
        .unwrap();

    let dir = std::env::temp_dir().join(format!("tinysol-mingas-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("mingas.tsol");
    std::fs::write(
        &file,
        format!(
            "interface I {{ f(int)^10_1 : 20 }}
             contract C : I {{ f(x) {{ skip }} }}
             contract A {{ field balance := 100; }}
             A->C.f(3):(1,{min_gas})"
        ),
    )
    .unwrap();
    let check = run(&["check", file.to_str().unwrap()]);
    assert_eq!(check.status.code(), Some(0));
    let out = run(&["run", "--json", file.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    let outcome = v["receipts"][0]["outcome"].as_str().unwrap();
    assert_ne!(outcome, "exception:oog");
    assert_eq!(outcome, "done");
}

#[test]
fn snapshot_out_and_in_round_trip() {
    let dir = std::env::temp_dir().join(format!("tinysol-snap-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let snap = dir.join("state.json");

    let out = run(&[
        "run",
        data("good.tsol").to_str().unwrap(),
        "--snapshot-out",
        snap.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let bytes = std::fs::read_to_string(&snap).unwrap();
    assert_eq!(bytes, r#"{"A":{"balance":97},"C":{"balance":1}}"#);

    // Re-run the same transactions from the snapshot: gas and transfer are
    // deducted again.
    let out = run(&[
        "run",
        "--json",
        data("good.tsol").to_str().unwrap(),
        "--snapshot-in",
        snap.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["state"]["A"]["balance"], serde_json::json!(94));

    // Corrupted snapshots are input errors.
    std::fs::write(&snap, "{not json").unwrap();
    let out = run(&[
        "run",
        data("good.tsol").to_str().unwrap(),
        "--snapshot-in",
        snap.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn conformance_command_reports_ok() {
    let out = run(&["conformance", "--cases", "40", "--seed", "7", "--json"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["ok"], serde_json::Value::Bool(true));
    assert_eq!(v["programs"]["cases"], serde_json::json!(40));
    assert_eq!(v["lemmas"]["cases"], serde_json::json!(40));
}

#[test]
fn int_max_env_override() {
    // With a tiny INT_MAX, `send`'s declared transfer range tightens, so an
    // omitted method bound range follows it.
    let dir = std::env::temp_dir().join(format!("tinysol-intmax-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("send.tsol");
    std::fs::write(&file, "contract C { }").unwrap();
    let out = bin()
        .args(["bound", file.to_str().unwrap(), "C.send"])
        .env("TINYSOL_INT_MAX", "7")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["declared_n"], serde_json::json!(1));
    let out = bin()
        .args(["check", file.to_str().unwrap()])
        .env("TINYSOL_INT_MAX", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
