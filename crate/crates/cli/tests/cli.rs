use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stadium-limits"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("STADIUM_LIMITS_THREADS")
        .output()
        .expect("binary runs")
}

fn summary(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap()
}

fn value(stdout: &str, key: &str) -> f64 {
    stdout
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("{key} missing from {stdout}"))
        .parse()
        .unwrap()
}

#[test]
fn constants_at_ell_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["constants", "--ell", "2"], dir.path());
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!((value(&text, "I_tau") - 2.0).abs() < 1e-10);
    assert!((value(&text, "tau_bar") - 2.18182).abs() < 1e-5);
    assert!((value(&text, "ell_star") - 1.18114).abs() < 1e-5);
    assert!((value(&text, "c_tau0") - 0.06661).abs() < 1e-5);
    assert!((value(&text, "y") - 5.68050).abs() < 1e-5);
    let s = summary(dir.path());
    assert_eq!(s["command"], "constants");
    assert_eq!(s["config"]["ell"], 2.0);
    assert_eq!(s["seeds"]["master_seed"], 1);
    assert!(s["version"].is_string() && s["wall_seconds"].is_number());
}

#[test]
fn clt_samples_are_byte_identical_across_runs_and_workers() {
    let args = [
        "clt",
        "--ell",
        "2",
        "--obs",
        "tau0",
        "--n",
        "32768",
        "--samples",
        "4000",
        "--seed",
        "7",
    ];
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let oa = run(&[&args[..], &["--workers", "1"]].concat(), a.path());
    let ob = run(&[&args[..], &["--workers", "3"]].concat(), b.path());
    assert!(oa.status.success() && ob.status.success());
    let ca = std::fs::read(a.path().join("clt_samples.csv")).unwrap();
    let cb = std::fs::read(b.path().join("clt_samples.csv")).unwrap();
    assert_eq!(ca, cb);
    assert!(ca.starts_with(b"sample_index,value\n"));
    assert_eq!(ca.iter().filter(|&&c| c == b'\n').count(), 4001);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"ell": 1.5, "master_seed": 11}"#).unwrap();
    let o = run(
        &["constants", "--config", cfg.to_str().unwrap(), "--ell", "3"],
        dir.path(),
    );
    assert!(o.status.success());
    let s = summary(dir.path());
    assert_eq!(s["config"]["ell"], 3.0);
    assert_eq!(s["config"]["master_seed"], 11);
}

#[test]
fn bad_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"samples": "many"}"#).unwrap();
    let o = run(&["tails", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stderr).unwrap().contains("`samples`"));
}

#[test]
fn validate_reports_per_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["validate", "--quick", "--criteria", "1,3"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let s = summary(dir.path());
    let crit = s["results"]["criteria"].as_array().unwrap();
    assert_eq!(crit.len(), 2);
    assert!(crit.iter().all(|c| c["passed"] == true));
}

#[test]
fn failing_validation_exits_with_two() {
    // The reference value of mu0(X) disagrees with the dynamics (see README).
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["validate", "--quick", "--criteria", "2"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(summary(dir.path())["results"]["passed"], false);
}

#[test]
fn tails_writes_its_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["tails", "--samples", "20000", "--obs", "segment_bump"],
        dir.path(),
    );
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.path().join("tails.csv")).unwrap();
    assert!(csv.starts_with("n,count,prob,theory\n"));
    assert_eq!(csv.lines().count(), 1001);
}
