use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn dmu(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dmu"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

const HALF_CHORD: &str = r#"{"kind": "power", "lambda": 1.0, "alpha": 1.0, "scale": 0.5}"#;

#[test]
fn norm_of_half_chord_under_lebesgue() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "p.json",
        &format!(r#"{{"measure": "lebesgue", "function": {HALF_CHORD}}}"#),
    );
    let out = dmu(&["norm", "--problem", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["command"], "norm");
    let norm = v["result"]["norm_sq"]["value"].as_f64().unwrap();
    assert!((norm - 0.75).abs() < 1e-8, "{norm}");
    assert!((v["result"]["h2"]["estimate"]["value"].as_f64().unwrap() - 0.5).abs() < 1e-8);
}

#[test]
fn malformed_problem_reports_json_pointer_and_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "bad.json",
        r#"{"function": {"kind": "power", "lambda": 1.0, "alfa": 1.0}}"#,
    );
    let out = dmu(&["norm", "--problem", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("function"), "{err}");

    let p = write(dir.path(), "params.json", r#"{"params": {"zeta": 1, "bogus": 2}}"#);
    let out = dmu(&["localdir", "--problem", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("params"));

    let p = write(dir.path(), "syntax.json", "{not json");
    assert_eq!(dmu(&["norm", "--problem", p.to_str().unwrap()]).status.code(), Some(1));

    assert_eq!(
        dmu(&["norm", "--problem", "/nonexistent/problem.json"]).status.code(),
        Some(1)
    );
}

#[test]
fn point_outside_disc_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "p.json",
        r#"{"measure": "lebesgue", "params": {"points": [[1.5, 0.0]]}}"#,
    );
    assert_eq!(
        dmu(&["poisson", "--problem", p.to_str().unwrap()]).status.code(),
        Some(1)
    );
}

#[test]
fn skipped_verification_exits_two() {
    // g = z vanishes at the origin, so it is not outer and the check is skipped
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "p.json",
        &format!(
            r#"{{"measure": "lebesgue", "function": {{"kind": "identity"}},
                "params": {{"check": "norm_ineq", "h": {HALF_CHORD}, "n": 2}}}}"#
        ),
    );
    let out = dmu(&["verify", "--problem", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["result"]["status"], "SKIP");
}

#[test]
fn seeded_corpus_runs_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    let out = dmu(&["--seed-corpus", "--out", corpus.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let mut files: Vec<_> = std::fs::read_dir(&corpus).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    assert!(files.len() >= 10);
    for f in files {
        let name = f.file_stem().unwrap().to_str().unwrap().to_string();
        let command = name.split("__").next().unwrap();
        let args = [command, "--problem", f.to_str().unwrap()];
        let a = dmu(&args);
        assert_eq!(
            a.status.code(),
            Some(0),
            "{name}: {}",
            String::from_utf8_lossy(&a.stderr)
        );
        let b = dmu(&args);
        assert_eq!(a.stdout, b.stdout, "{name} is not byte-identical across runs");
    }
}

#[test]
fn spec_override_is_echoed_and_validated() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "p.json",
        &format!(r#"{{"measure": "lebesgue", "function": {HALF_CHORD}}}"#),
    );
    let spec = write(dir.path(), "spec.json", r#"{"rel_tol": 1e-8}"#);
    let out = dmu(&[
        "norm",
        "--problem",
        p.to_str().unwrap(),
        "--spec",
        spec.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["spec"]["rel_tol"].as_f64(), Some(1e-8));

    let bad = write(dir.path(), "bad.json", r#"{"rel_tol": -1.0}"#);
    let out = dmu(&[
        "norm",
        "--problem",
        p.to_str().unwrap(),
        "--spec",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}
