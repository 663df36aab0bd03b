use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinsqueeze")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn sweep_help_documents_bypass() {
    let out = run(&["sweep", "--help"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("--bypass"));
    assert!(text.contains("M = N = identity"));
}

#[test]
fn sweep_writes_csv() {
    let out = run(&[
        "sweep", "--channel", "adc", "--theta", "1.8pi", "--m", "4", "--p-grid", "0:0.1:0.05",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "p,xi1_sq,xi2_sq,xi3_sq,zeta2_sq,zeta3_sq,concurrence,source");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("0,0.2431964300789"));
    assert!(lines.iter().skip(1).all(|l| l.ends_with(",closed")));
}

#[test]
fn sweep_writes_json_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let out = run(&[
        "sweep", "--channel", "pdc", "--theta", "5.654866776461628", "--n-spins", "6", "--bypass",
        "--p-grid", "0.1,0.2", "--source", "both", "--format", "json", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let rows = value["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0]["source"], "closed");
    assert_eq!(rows[1]["source"], "oracle");
    assert!(value["meta"]["spec"].is_object());
}

#[test]
fn knobs_are_mutually_exclusive_and_required() {
    let both = run(&["sweep", "--channel", "adc", "--theta", "1", "--m", "2", "--n", "3"]);
    assert!(!both.status.success());
    let neither = run(&["sweep", "--channel", "adc", "--theta", "1"]);
    assert!(!neither.status.success());
}

#[test]
fn invalid_input_is_reported() {
    let grid = run(&["sweep", "--channel", "adc", "--theta", "1", "--bypass", "--p-grid", "0:2:0.1"]);
    assert!(!grid.status.success());
    let preset = run(&["figure", "fig9z"]);
    assert_eq!(preset.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&preset.stderr).contains("fig9z"));
    let oracle = run(&[
        "sweep", "--channel", "dpc", "--theta", "1", "--n-spins", "20", "--bypass", "--source",
        "oracle",
    ]);
    assert!(!oracle.status.success());
}

#[test]
fn sssd_prints_threshold_or_none() {
    let out = run(&["sssd", "--channel", "adc", "--theta", "1.8pi", "--bypass", "--quantity", "zeta3"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "0.30446561");
    let out = run(&["sssd", "--channel", "adc", "--theta", "1.8pi", "--m", "70", "--quantity", "zeta3"]);
    assert_eq!(stdout(&out).trim(), "none");
}

#[test]
fn figure_output_is_deterministic() {
    let a = run(&["figure", "fig3c"]);
    let b = run(&["figure", "fig3c"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 202);
}

#[test]
fn verify_reports_json_and_passes() {
    let out = run(&["verify", "--channel", "adc", "--n-spins", "4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["passed"], true);
}
