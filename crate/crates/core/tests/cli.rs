use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn depsynth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_depsynth")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = depsynth(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn error_code(out: &Output) -> String {
    let v: Value = serde_json::from_slice(&out.stderr).unwrap_or_else(|_| panic!("{}", String::from_utf8_lossy(&out.stderr)));
    v["error"]["code"].as_str().unwrap().to_string()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    ok(&["generate", "--case", "1", "--seed", "5", "--out", p(&a)]);
    ok(&["generate", "--case", "1", "--seed", "5", "--out", p(&b)]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 101);

    let manifest: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("a.csv.manifest.json")).unwrap()).unwrap();
    let other: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("b.csv.manifest.json")).unwrap()).unwrap();
    let digests = |m: &Value| m["outputs"].as_object().unwrap().values().cloned().collect::<Vec<_>>();
    assert_eq!(digests(&manifest), digests(&other));
    assert_eq!(manifest["seed"], 5);
}

#[test]
fn zero_rows_gives_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    ok(&["generate", "--case", "3", "--rows", "0", "--out", p(&out)]);
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("patient_id,"));
}

#[test]
fn mine_score_synth_eval_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = |n: &str| dir.path().join(n);
    ok(&["generate", "--case", "1", "--seed", "2", "--out", p(&d("real.csv"))]);
    ok(&["mine", "--in", p(&d("real.csv")), "--out", p(&d("fds.json"))]);
    let fds: Value = serde_json::from_str(&fs::read_to_string(d("fds.json")).unwrap()).unwrap();
    for (lhs, rhs) in [("diagnosis", "department"), ("diagnosis", "diagnosis_code"), ("department", "floor"), ("department", "wing")] {
        assert!(
            fds.as_array().unwrap().iter().any(|f| f["lhs"] == serde_json::json!([lhs]) && f["rhs"] == rhs),
            "{lhs} -> {rhs} not mined"
        );
    }

    ok(&["score", "--in", p(&d("real.csv")), "--out", p(&d("q.json"))]);
    let q: Value = serde_json::from_str(&fs::read_to_string(d("q.json")).unwrap()).unwrap();
    assert_eq!(q["scores"].as_array().unwrap().len(), 42);

    ok(&[
        "synth", "--ref", p(&d("real.csv")), "--mined", p(&d("fds.json")), "--qreport", p(&d("q.json")), "--hfgf", "--seed", "2",
        "--out", p(&d("syn.csv")),
    ]);
    let summary = ok(&["eval", "--real", p(&d("real.csv")), "--synth", p(&d("syn.csv")), "--out", p(&d("report.json"))]);
    assert!(summary.starts_with("FD "), "{summary}");
    let text = fs::read_to_string(d("report.json")).unwrap();
    let at = |k: &str| text.find(&format!("\"{k}\"")).unwrap();
    assert!(at("preservation") < at("column_tv") && at("column_tv") < at("provenance"));
    let report: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(report["provenance"]["arm"], "hfgf");
    assert_eq!(report["preservation"]["fd_pct"], 100.0);
}

#[test]
fn two_column_score() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("t.csv");
    fs::write(&input, "A,B\na1,b1\na1,b2\na2,b1\n").unwrap();
    let out = dir.path().join("q.json");
    ok(&["score", "--in", p(&input), "--out", p(&out)]);
    let q: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let scores = q["scores"].as_array().unwrap();
    assert_eq!(scores.len(), 2);
    assert_eq!(scores[0]["q"], "1/2");
    assert_eq!(scores[0]["class"], "LD");
}

#[test]
fn self_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.csv");
    ok(&["generate", "--case", "4", "--out", p(&t)]);
    let out = dir.path().join("r.json");
    let summary = ok(&["eval", "--real", p(&t), "--synth", p(&t), "--out", p(&out)]);
    assert!(summary.contains("(100%), LD") && summary.trim_end().ends_with("(100%)"), "{summary}");
}

#[test]
fn errors_exit_two_with_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");

    let missing = depsynth(&["mine", "--in", "/nonexistent/t.csv", "--out", p(&out)]);
    assert_eq!(missing.status.code(), Some(2));
    assert_eq!(error_code(&missing), "io");

    let ragged = dir.path().join("r.csv");
    fs::write(&ragged, "a,b\n1\n").unwrap();
    let bad = depsynth(&["mine", "--in", p(&ragged), "--out", p(&out)]);
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(error_code(&bad), "ragged_row");

    let usage = depsynth(&["synth", "--ref", p(&ragged), "--out", p(&out)]);
    assert_eq!(usage.status.code(), Some(2));
    assert_eq!(error_code(&usage), "usage");

    let zero = depsynth(&["pipeline", "--case", "1", "--rows-override", "0", "--outdir", p(&out)]);
    assert_eq!(zero.status.code(), Some(2));
    assert_eq!(error_code(&zero), "invalid_argument");

    let threads = Command::new(env!("CARGO_BIN_EXE_depsynth"))
        .args(["generate", "--case", "1", "--out", p(&out)])
        .env("DEPSYNTH_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(2));

    assert!(depsynth(&["--help"]).status.success());
}

#[test]
fn pipeline_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let first = ok(&["pipeline", "--case", "1", "--seed", "3", "--outdir", p(&a)]);
    let second = Command::new(env!("CARGO_BIN_EXE_depsynth"))
        .args(["pipeline", "--case", "1", "--seed", "3", "--outdir", p(&b)])
        .env("DEPSYNTH_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(second.stdout).unwrap(), first);
    assert!(first.contains("| HFGF     |"));

    let names = [
        "benchmark.csv",
        "hfgf.csv",
        "baseline.csv",
        "report_hfgf.json",
        "report_baseline.json",
        "summary.md",
        "manifest.json",
    ];
    for name in names {
        let (x, y) = (fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap());
        if name == "manifest.json" {
            let (mx, my): (Value, Value) = (serde_json::from_slice(&x).unwrap(), serde_json::from_slice(&y).unwrap());
            let hashes = |m: &Value| m["outputs"].as_object().unwrap().values().cloned().collect::<Vec<_>>();
            assert_eq!(hashes(&mx), hashes(&my));
        } else {
            assert_eq!(x, y, "{name} differs");
        }
    }
    let report: Value = serde_json::from_slice(&fs::read(a.join("report_hfgf.json")).unwrap()).unwrap();
    assert_eq!(report["preservation"]["fd_pct"], 100.0);
    assert_eq!(report["provenance"]["seeds"]["synth"], 3);
}
