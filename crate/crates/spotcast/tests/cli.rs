//! Smoke tests over the compiled binary.

use std::path::Path;
use std::process::Command;

fn spotcast() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spotcast"))
}

fn fixtures() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures"))
}

#[test]
fn ingest_round_trips_the_fixture() {
    let out = spotcast()
        .arg("ingest")
        .arg(fixtures().join("stream.jsonl"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 1000);
    assert!(stdout.lines().all(|l| l.starts_with('{')));
}

#[test]
fn communities_reports_structural_counts() {
    let out = spotcast()
        .arg("communities")
        .arg(fixtures().join("stream.jsonl"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let reports: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let kinds: Vec<&str> =
        reports.as_array().unwrap().iter().map(|r| r["kind"].as_str().unwrap()).collect();
    assert_eq!(kinds.iter().filter(|k| **k == "Opinions").count(), 3);
    assert_eq!(kinds.iter().filter(|k| **k == "Temporal").count(), 4);
}

#[test]
fn geonet_emits_ten_clusters() {
    let out = spotcast()
        .arg("geonet")
        .arg(fixtures().join("stream.jsonl"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let reports: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(reports.as_array().unwrap().len(), 10);
}

#[test]
fn annotate_labels_everything_in_fixture() {
    let out = spotcast()
        .arg("annotate")
        .arg(fixtures().join("stream.jsonl"))
        .arg("--fixture")
        .arg(fixtures().join("venues.tsv"))
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 1000);
    assert!(String::from_utf8(out.stderr).unwrap().contains("dropped 0"));
}

#[test]
fn missing_input_fails_with_nonzero_exit() {
    let out = spotcast().arg("ingest").arg("/nonexistent/stream.jsonl").output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("error"));
}

#[test]
fn forecast_after_run_all() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = tmp.path().join("pipeline.conf");
    let base = std::fs::read_to_string(fixtures().join("pipeline.conf")).unwrap();
    let patched = format!(
        "{}\ninput = {}\nvenues = {}\nmodel_dir = models\nreport_dir = reports\nnn_epochs = 8\nembed_epochs = 8\nnn_hidden = 16\nembed_dim = 12\n",
        base,
        fixtures().join("stream.jsonl").display(),
        fixtures().join("venues.tsv").display(),
    );
    std::fs::write(&conf, patched).unwrap();

    let out = spotcast().arg("--config").arg(&conf).arg("run-all").output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8(out.stdout).unwrap().contains("mca"));
    assert!(tmp.path().join("reports/report.json").exists());

    let out = spotcast()
        .arg("--config")
        .arg(&conf)
        .args(["forecast", "user0000", "--weekday", "2", "--hour", "18"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let forecast: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(forecast["confidence"].as_f64().unwrap() > 0.0);
    assert!(forecast["category"].is_string());

    let out = spotcast()
        .arg("--config")
        .arg(&conf)
        .args(["forecast", "ghost"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("unknown user"));
}
