use std::path::Path;
use std::process::{Command, Output};

use harmonia::model_file::load_model;

fn harmonia(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_harmonia"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

#[test]
fn gen_random_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["gen", "--seed", "42", "--out", "a.json", "random", "--n", "3", "--dep-sizes", "2,3,4"];
    assert!(harmonia(dir.path(), &args).status.success());
    let mut again = args;
    again[4] = "b.json";
    assert!(harmonia(dir.path(), &again).status.success());
    let a = std::fs::read(dir.path().join("a.json")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.json")).unwrap());
    assert_eq!(load_model(&dir.path().join("a.json")).unwrap().n(), 3);
}

#[test]
fn gen_copy_and_counterexample_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = harmonia(dir.path(), &["gen", "-o", "copy.json", "copy", "--n", "2", "--size", "2", "--noise", "0.1"]);
    assert!(out.status.success());
    assert!(text(&out.stdout).contains("factored: true"));

    let out = harmonia(dir.path(), &["gen", "counterexample"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["metadata"]["factored"], serde_json::Value::Bool(false));
    assert!(text(&out.stderr).contains("factored: false"));
}

#[test]
fn verify_small_sweep_passes_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let args = ["verify", "--sweep-size", "5", "--n", "1,2,3", "--sizes", "2,3", "--no-timestamp", "--out", name];
        let out = harmonia(dir.path(), &args);
        assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
        std::fs::read(dir.path().join(name)).unwrap()
    };
    let first = run("a.csv");
    assert_eq!(first, run("b.csv"));
    assert!(text(&first).starts_with("model_id,theorem,relation"));
}

#[test]
fn verify_timestamp_header_is_optional() {
    let dir = tempfile::tempdir().unwrap();
    let out = harmonia(dir.path(), &["verify", "--sweep-size", "1", "--n", "2", "--sizes", "2"]);
    assert!(out.status.success());
    assert!(text(&out.stdout).starts_with("# generated_at_unix="));
}

#[test]
fn verify_counterexample_fails_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    assert!(harmonia(dir.path(), &["gen", "-o", "bad.json", "counterexample"]).status.success());
    let out = harmonia(
        dir.path(),
        &["verify", "--model", "bad.json", "--witness-dir", "w", "--no-timestamp", "-o", "r.csv"],
    );
    assert_eq!(out.status.code(), Some(1));
    let report = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert!(report.lines().any(|l| l.starts_with("bad,remainder,k=1 >=") && l.contains(",false,")));
    assert!(dir.path().join("w/bad.json").exists());
}

#[test]
fn verify_rejects_zero_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let out = harmonia(dir.path(), &["verify", "--sweep-size", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("sweep size"));
}

#[test]
fn profile_names_head_last() {
    let dir = tempfile::tempdir().unwrap();
    assert!(harmonia(dir.path(), &["gen", "-o", "m.json", "copy", "--n", "2", "--size", "2", "--noise", "0.1"])
        .status
        .success());
    let out = harmonia(dir.path(), &["profile", "m.json", "--objective", "head", "--no-timestamp", "-o", "p.csv"]);
    assert!(out.status.success());
    assert!(text(&out.stdout).contains("argmax head positions: {3}"));
    let csv = std::fs::read_to_string(dir.path().join("p.csv")).unwrap();
    assert!(csv.starts_with("head_position,placement,k,produced,remainder_nats"));
}

#[test]
fn profile_of_independent_model_ties() {
    let dir = tempfile::tempdir().unwrap();
    assert!(harmonia(dir.path(), &["gen", "-o", "m.json", "independent", "--n", "2", "--size", "3"]).status.success());
    let out = harmonia(dir.path(), &["profile", "m.json", "--objective", "dependent", "--bits", "--no-timestamp"]);
    assert!(out.status.success());
    assert!(text(&out.stderr).contains("argmax head positions: {1,2,3}"));
}

#[test]
fn profile_of_single_dependent_is_symmetric() {
    let dir = tempfile::tempdir().unwrap();
    assert!(harmonia(dir.path(), &["gen", "--seed", "3", "-o", "m.json", "random", "--n", "1"]).status.success());
    let out = harmonia(dir.path(), &["profile", "m.json", "--objective", "remainder", "--k", "1", "--no-timestamp"]);
    assert!(out.status.success());
    assert!(text(&out.stderr).contains("argmax head positions: {1,2}"));
}

#[test]
fn profile_reports_parse_location() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("m.json"), "{\"n\": 1,\n \"head_alphabet\": []}").unwrap();
    let out = harmonia(dir.path(), &["profile", "m.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("line 2"));
}

#[test]
fn typology_bundled_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = harmonia(dir.path(), &["typology", "--no-timestamp", "-o", "t.csv"]);
    assert!(out.status.success());
    let stdout = text(&out.stdout);
    assert!(stdout.contains("WALS / languages (total 1056)"));
    assert!(stdout.contains("all groups increasing: true"));
    let csv = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert!(csv.contains("Hammarstrom2016,families,1,42,340,12.4,12.4,true,true"));
}

#[test]
fn typology_schema_error_names_column() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("t.csv"), "source,unit,position,frequency,percentage\n").unwrap();
    let out = harmonia(dir.path(), &["typology", "t.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("`order_position`"));
}

#[test]
fn sample_writes_sequence_columns() {
    let dir = tempfile::tempdir().unwrap();
    assert!(harmonia(dir.path(), &["gen", "-o", "m.json", "copy", "--n", "2", "--size", "2"]).status.success());
    let args = ["sample", "m.json", "--count", "20", "--head-position", "3", "--seed", "5", "--no-timestamp"];
    let out = harmonia(dir.path(), &args);
    assert!(out.status.success());
    let body = text(&out.stdout);
    let mut lines = body.lines();
    assert_eq!(lines.next(), Some("M1,M2,L"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| *r == "0,0,0" || *r == "1,1,1"));
    assert_eq!(harmonia(dir.path(), &args).stdout, out.stdout);
}

#[test]
fn config_file_sets_the_sweep() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), r#"{"sweep_size": 2, "n_values": [2], "sizes": [3], "timestamp": false}"#)
        .unwrap();
    let out = harmonia(dir.path(), &["verify", "--config", "c.json"]);
    assert!(out.status.success());
    assert!(text(&out.stderr).starts_with("2 models"));
}
