use std::fs;
use std::process::Command;

use sha2::{Digest, Sha256};

fn xwct() -> Command {
    Command::new(env!("CARGO_BIN_EXE_xwct"))
}

#[test]
fn gen_writes_files_listed_in_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = xwct()
        .args(["gen", "--example", "3", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "gen");
    let files = manifest["files"].as_array().unwrap();
    let names: Vec<&str> = files.iter().map(|f| f["path"].as_str().unwrap()).collect();
    assert_eq!(names, ["components.csv", "signal.csv", "truth.csv"]);
    for f in files {
        let bytes = fs::read(dir.path().join(f["path"].as_str().unwrap())).unwrap();
        let hex: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(f["sha256"], hex.as_str());
        assert_eq!(f["bytes"], bytes.len());
    }
    let signal = fs::read_to_string(dir.path().join("signal.csv")).unwrap();
    assert_eq!(signal.lines().next(), Some("t,re,im"));
    assert_eq!(signal.lines().count(), 512 + 1);
}

#[test]
fn spec_file_round_trips_through_gen() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(
        &spec,
        r#"{"n": 64, "dt": 0.0078125, "components": [{"phase": {"kind": "polynomial", "coeffs": [0, 20, 1, 0]}}]}"#,
    )
    .unwrap();
    let out = xwct()
        .args(["gen", "--spec"])
        .arg(&spec)
        .arg("--out-dir")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let truth = fs::read_to_string(dir.path().join("o/truth.csv")).unwrap();
    let row: Vec<f64> = truth
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(row, [0.0, 20.0, 2.0]);
}

#[test]
fn exit_codes_separate_validation_from_io() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.json");
    // IF of 80 Hz is above the 64 Hz Nyquist limit
    fs::write(
        &spec,
        r#"{"n": 64, "dt": 0.0078125, "components": [{"phase": {"kind": "polynomial", "coeffs": [0, 80, 0, 0]}}]}"#,
    )
    .unwrap();
    let out = xwct().args(["gen", "--spec"]).arg(&spec).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let missing = dir.path().join("nope.csv");
    let out = xwct().args(["ridges", "--input"]).arg(&missing).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.csv"));
}
