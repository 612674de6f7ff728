//! End-to-end smoke tests: run the compiled binary against a temporary
//! output directory and check exit codes, emitted files, and headline stdout
//! lines. Parameters are kept small so the whole file runs in seconds.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn floq(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_floq"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn stdout_of(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn oracle_check_reports_clean_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let out = floq(dir.path(), &["oracle-check"]);
    let text = stdout_of(&out);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(text.contains("residual"), "stdout: {text}");
    assert!(dir.path().join("manifest.json").is_file());
}

#[test]
fn phase_diagram_small_grid_agrees_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    let out = floq(dir.path(), &["phase-diagram", "--grid", "6", "--k-points", "128"]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("phase_diagram.csv")).unwrap();
    // header plus one row per grid cell
    assert_eq!(csv.lines().count(), 1 + 6 * 6, "csv:\n{csv}");
    let manifest = fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    assert!(manifest.contains("\"command\": \"phase-diagram\""), "manifest: {manifest}");
}

#[test]
fn transfer_writes_per_period_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = floq(dir.path(), &["transfer", "--periods-per-step", "10"]);
    let text = stdout_of(&out);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(text.contains("fidelity"), "stdout: {text}");
    let csv = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("period,step"), "header: {header}");
    // three schedule steps at 10 periods each, one record per period
    assert_eq!(csv.lines().count(), 1 + 30, "csv:\n{csv}");
}

#[test]
fn entangle_reports_both_end_modes() {
    let dir = tempfile::tempdir().unwrap();
    let out = floq(dir.path(), &["entangle", "--periods-per-step", "10"]);
    let text = stdout_of(&out);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("entangle.csv").is_file());
    assert!(text.contains("|<0|psi>|") && text.contains("|<pi|psi>|"), "stdout: {text}");
}

#[test]
fn sweep_honors_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "[transfer]\nperiods_per_step = 10\n\n\
         [sweep]\nw_grid = [0.0, 0.3]\nrealizations = 2\nmaster_seed = 11\n",
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_floq"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .args(["disorder-sweep"])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2, "one row per W:\n{csv}");
    assert!(csv.lines().next().unwrap().starts_with("W,mean_F"));
}

#[test]
fn unknown_config_key_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[model]\nn_sites = 3\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_floq"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .args(["oracle-check"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn malformed_toml_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("broken.toml");
    fs::write(&cfg, "[model\nn_l = ").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_floq"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .args(["oracle-check"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}
