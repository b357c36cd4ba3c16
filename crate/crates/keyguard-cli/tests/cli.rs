//! End-to-end CLI checks: verbs, exit codes, output routing.

use std::path::PathBuf;
use std::process::Command;

fn exe() -> &'static str {
    env!("CARGO_BIN_EXE_keyguard")
}

fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn temp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("keyguard-cli-test-{}-{name}", std::process::id()))
}

#[test]
fn run_succeeds_with_exit_zero() {
    let out = Command::new(exe())
        .arg("run")
        .arg(scenarios_dir().join("password.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("0/8 (0.0%)"), "{stdout}");
}

#[test]
fn invalid_rule_exits_two() {
    let path = temp_path("bad-rule.json");
    std::fs::write(
        &path,
        r#"{"fields": [{"id": "f", "input_class": "PlainText"}],
            "rules": [{"rule_id": "r", "prefix": "abc", "total_length": 3}],
            "key_hex": "aa", "keyguard_enabled": true,
            "adversary": "direct", "trace": []}"#,
    )
    .unwrap();
    let out = Command::new(exe()).arg("run").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let _ = std::fs::remove_file(&path);
}

#[test]
fn unparseable_file_exits_two() {
    let path = temp_path("garbage.json");
    std::fs::write(&path, "{ this is not json").unwrap();
    let out = Command::new(exe()).arg("run").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let _ = std::fs::remove_file(&path);
}

#[test]
fn missing_file_exits_two() {
    let out = Command::new(exe())
        .arg("validate")
        .arg("/nonexistent/scenario.json")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_reports_event_count() {
    let out = Command::new(exe())
        .arg("validate")
        .arg(scenarios_dir().join("bench.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("80 key events"), "{stdout}");
}

#[test]
fn out_flag_writes_report_file() {
    let path = temp_path("report.json");
    let out = Command::new(exe())
        .arg("run")
        .arg(scenarios_dir().join("rule_partial.json"))
        .args(["--format", "machine", "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty(), "report must go to the file, not stdout");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["leakage"]["overall"]["exposed_plaintext"], 3);
    let _ = std::fs::remove_file(&path);
}

#[test]
fn bench_machine_report_carries_latency() {
    let out = Command::new(exe())
        .arg("bench")
        .arg(scenarios_dir().join("bench.json"))
        .args(["--reps", "2", "--format", "machine"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["latency"].is_object());
    assert_eq!(report["latency"]["repetitions"], 2);
    assert_eq!(report["latency"]["on_key"]["hooked"]["n"], 160);
}

#[test]
fn bench_rejects_short_traces() {
    let out = Command::new(exe())
        .arg("bench")
        .arg(scenarios_dir().join("password.json"))
        .args(["--reps", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("at least 60"), "{stderr}");
}

#[test]
fn paired_run_emits_passthrough_section() {
    let out = Command::new(exe())
        .arg("run")
        .arg(scenarios_dir().join("plain_typing.json"))
        .args(["--paired", "--format", "machine"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passthrough"]["identical"], true);
}
