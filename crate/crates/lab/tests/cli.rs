//! Exit codes and output files of the `varspace` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("varspace-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn varspace(args: &[&str], config: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_varspace")).args(args).arg("--config").arg(config).output().unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn passing_audit_exits_zero_and_writes_both_files() {
    let dir = scratch("ok");
    let (report, csv) = (dir.join("r.json"), dir.join("r.csv"));
    let out = Command::new(env!("CARGO_BIN_EXE_varspace"))
        .arg("verify-qe")
        .arg("--config")
        .arg(configs().join("qe_whole.json"))
        .arg("--report")
        .arg(&report)
        .arg("--csv")
        .arg(&csv)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(json["experiment"], "verify-qe");
    assert_eq!(json["provenance"]["config_sha256"].as_str().unwrap().len(), 64);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("group,trial,scale,norm_a,norm_b,ratio\n"));
    assert_eq!(text.lines().count(), 1 + 100 * 5 * 2);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn failed_verdict_exits_one() {
    let out = varspace(&["audit-domain"], &configs().join("audit_slit_square.json"));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("MR@8"));
    // The report still goes to stdout.
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["verdicts"][0]["pass"], false);
}

#[test]
fn config_problems_exit_two() {
    let dir = scratch("bad");
    let cases = [
        ("unknown.json", "verify-qe", r#"{"trails": 4}"#),
        ("syntax.json", "verify-qe", "{"),
        ("label.json", "verify-qe", r#"{"experiment": "verify-conv"}"#),
        ("hypothesis.json", "verify-synthesis", r#"{"weight": {"kind": "classical", "s": 3.0}}"#),
        ("no_domain.json", "audit-domain", "{}"),
    ];
    for (name, cmd, body) in cases {
        let out = varspace(&[cmd], &write_config(&dir, name, body));
        assert_eq!(out.status.code(), Some(2), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.is_empty(), "{name} printed a report");
    }
    let missing = varspace(&["norm"], &dir.join("absent.json"));
    assert_eq!(missing.status.code(), Some(2));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn hypothesis_violation_is_quoted() {
    let dir = scratch("hyp");
    let out = varspace(&["verify-synthesis"], &write_config(&dir, "k.json", r#"{"synthesis": {"k": 0.2}, "weight": {"kind": "classical", "s": 0.5}}"#));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("K > alpha_2"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_varspace"))
        .args(["norm", "--config"])
        .arg(configs().join("norm_gaussian_besov.json"))
        .env("VARSPACE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn every_shipped_config_parses_and_matches_its_label() {
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let cfg = varspace_lab::ExperimentConfig::from_json(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let label = cfg.experiment.unwrap_or_else(|| panic!("{} has no experiment label", path.display()));
        assert!(varspace_lab::EXPERIMENTS.contains(&label.as_str()), "{label}");
    }
}
