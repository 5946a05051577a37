use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_magobs");

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(cmd: &str, cfg: &Path, out: &Path) -> Output {
    Command::new(BIN).args([cmd, "--config"]).arg(cfg).arg("--out").arg(out).args(["--threads", "1"]).output().unwrap()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn obs_constant_on_full_torus() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("obs-constant", &config("full_torus_obs.json"), dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_path(dir.path().join("obs.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(headers.iter().collect::<Vec<_>>(), ["h", "T_eff", "lambda_min", "C_obs", "dim"]);
    let row = rdr.records().next().unwrap().unwrap();
    let c: f64 = row[3].parse().unwrap();
    assert!((c - 0.5).abs() < 1e-10, "C_obs = {c}");
    let m = manifest(dir.path());
    assert_eq!(m["command"], "obs-constant");
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn runs_are_byte_identical() {
    for (cmd, cfg, file) in [
        ("check-mgcc", "toy_model.json", "mgcc.csv"),
        ("quasimode", "quasimode.json", "quasimode.csv"),
        ("damped", "damped.json", "damped.csv"),
    ] {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        assert!(run(cmd, &config(cfg), a.path()).status.success());
        assert!(run(cmd, &config(cfg), b.path()).status.success());
        let (x, y) = (fs::read(a.path().join(file)).unwrap(), fs::read(b.path().join(file)).unwrap());
        assert!(!x.is_empty());
        assert_eq!(x, y, "{cmd} output differs between runs");
    }
}

#[test]
fn toy_model_is_violated() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run("check-mgcc", &config("toy_model.json"), dir.path()).status.success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("mgcc_report.json")).unwrap()).unwrap();
    assert_eq!(report["overall"], "violated");
}

#[test]
fn unknown_keys_exit_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"n": 8, "obs": {"t": 1.0, "tt": 2.0}}"#).unwrap();
    let out = run("obs-constant", &cfg, &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["message"].as_str().unwrap().contains("tt"));
    let m = manifest(&dir.path().join("out"));
    assert!(m["error"].is_object());
}

#[test]
fn missing_config_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("gcc", &dir.path().join("nope.json"), dir.path());
    assert_eq!(out.status.code(), Some(2));
}
