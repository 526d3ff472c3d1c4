// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! The `qnetsim` binary: exit codes, artifacts and determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(name)
}

fn qnetsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qnetsim"))
        .args(args)
        .env_remove("QNETSIM_OUT")
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn report(dir: &Path) -> Value {
    let mut v: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    v.as_object_mut().unwrap().remove("timing");
    v
}

#[test]
fn validate_accepts_every_shipped_scenario() {
    for entry in std::fs::read_dir(scenario("")).unwrap() {
        let path = entry.unwrap().path();
        let out = qnetsim(&["validate", s(&path)]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}: {}",
            path.display(),
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn validate_reports_parse_and_capacity_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"network\": {\n    \"nodes\": [1,]\n}").unwrap();
    let out = qnetsim(&["validate", s(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let cap = dir.path().join("cap.json");
    std::fs::write(
        &cap,
        r#"{"network": {"nodes": [{"id": 0, "qubits": 2, "capacity": 2}, {"id": 1, "qubits": 1}], "edges": [[0, 1]]},
            "protocol": {"kind": "teleport", "src": 0, "dst": 1}}"#,
    )
    .unwrap();
    let out = qnetsim(&["validate", s(&cap)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("capacity rule"));
}

#[test]
fn teleport_run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = qnetsim(&[
        "run",
        s(&scenario("teleport.json")),
        "--seed",
        "1",
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in ["report.json", "trace.jsonl", "trace.dot", "trace.svg"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let r = report(dir.path());
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["engine"], "dense");
    assert_eq!(r["passed"], true);
    let fidelity = r["protocol"]["fidelity"]["min"].as_f64().unwrap();
    assert!((fidelity - 1.0).abs() < 1e-12);
    assert_eq!(r["protocol"]["inequality"]["pass"], true);
    let events = r["trace"]["events"].as_u64().unwrap() as usize;
    let jsonl = std::fs::read_to_string(dir.path().join("trace.jsonl")).unwrap();
    assert_eq!(jsonl.lines().count(), events);
}

#[test]
fn same_seed_gives_the_same_report() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let out = qnetsim(&[
            "run",
            s(&scenario("distributed_cnot.json")),
            "--seed",
            "77",
            "--jobs",
            "3",
            "--out",
            s(d.path()),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(report(a.path()), report(b.path()));
    for f in ["trace.jsonl", "trace.dot", "trace.svg"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn disconnected_schedule_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = qnetsim(&[
        "run",
        s(&scenario("scrambling_disconnected.json")),
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(dir.path());
    assert!(r["warnings"]
        .as_array()
        .unwrap()
        .iter()
        .any(|w| w.as_str().unwrap().starts_with("ScheduleDisconnected")));
    assert_eq!(r["passed"], false);
}

#[test]
fn sweep_rows_and_single_trial_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let out = qnetsim(&[
        "sweep",
        s(&scenario("scrambling_k4.json")),
        "--sizes",
        "1,2,3",
        "--trials",
        "1",
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sweep.json")).unwrap())
            .unwrap();
    let rows = v["decoupling"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows
        .iter()
        .all(|r| r["stderr_mi"].is_null() && r["stderr_deviation"].is_null()));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn sweep_on_a_protocol_scenario_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = qnetsim(&[
        "sweep",
        s(&scenario("teleport.json")),
        "--trials",
        "1",
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("scrambling"));
}

#[test]
fn output_directory_falls_back_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qnetsim"))
        .args(["run", s(&scenario("shared_coin.json"))])
        .env("QNETSIM_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("report.json").is_file());
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(qnetsim(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(qnetsim(&["run"]).status.code(), Some(1));
    assert_eq!(
        qnetsim(&["validate", "/nonexistent/scenario.json"])
            .status
            .code(),
        Some(1)
    );
}
