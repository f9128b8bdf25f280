//! End-to-end runs of the command-line binary.

use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::{json, Value};

fn cspkit(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_cspkit"))
        .args(args)
        .env_remove("CSPKIT_SEED")
        .output()
        .expect("binary runs");
    let stdout = String::from_utf8_lossy(&out.stdout);
    let v = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap_or(-1), v)
}

fn write(dir: &Path, name: &str, v: &Value) -> String {
    let p = dir.join(name);
    fs::write(&p, v.to_string()).unwrap();
    p.to_string_lossy().into_owned()
}

fn triangle_vc() -> Value {
    json!({
        "format": "cspkit-v1",
        "mode": "exact",
        "variables": [0, 1, 2],
        "functions": {"OR2": {"arity": 2, "values": [0, 1, 1, 1]}},
        "constraints": [
            {"fn": "OR2", "vars": [0, 1]},
            {"fn": "OR2", "vars": [1, 2]},
            {"fn": "OR2", "vars": [0, 2]}
        ]
    })
}

#[test]
fn eval_counts_triangle_covers() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "k3.json", &triangle_vc());
    for algorithm in ["auto", "brute", "ve"] {
        let (code, v) = cspkit(&["eval", "--input", &input, "--algorithm", algorithm]);
        assert_eq!(code, 0, "{algorithm}");
        assert_eq!(v["Z"]["w0"], "4/1", "{algorithm}: {v}");
    }
}

#[test]
fn eval_rejects_malformed_input_and_mode_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{not json").unwrap();
    assert_eq!(cspkit(&["eval", "--input", bad.to_str().unwrap()]).0, 2);
    let input = write(dir.path(), "k3.json", &triangle_vc());
    assert_eq!(cspkit(&["--mode", "approx", "eval", "--input", &input]).0, 4);
}

#[test]
fn classify_family() {
    assert_eq!(cspkit(&["classify", "--family", "{EQ2,NEQ2}"]).1["class"], "TRACTABLE_P");
    assert_eq!(cspkit(&["classify", "--family", "{OR2}"]).1["class"], "HARD");
}

#[test]
fn verify_pipeline_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write(dir.path(), "p3.json", &json!({"vertices": 3, "edges": [[0, 1], [1, 2]]}));
    let trace = dir.path().join("trace.json");
    let (code, _) = cspkit(&[
        "verify-pipeline",
        "--family",
        "{OR2}",
        "--graph",
        &graph,
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let t: Value = serde_json::from_str(&fs::read_to_string(&trace).unwrap()).unwrap();
    assert!(t.to_string().contains("verify_pipeline"));

    let (code, _) = cspkit(&["verify-pipeline", "--family", "{EQ2}", "--graph", &graph, "--trace", trace.to_str().unwrap()]);
    assert_eq!(code, 5);
    assert!(trace.exists());
}
