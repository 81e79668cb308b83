//! End-to-end smoke tests of the `stagehunt` binary: the documented
//! command lines, exit-code contract, and byte-for-byte determinism of
//! the emitted CSVs.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stagehunt"))
}

/// Fresh scratch directory, removed by `Scratch::drop`.
struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("stagehunt-cli-{tag}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }

    fn arg(&self) -> &str {
        self.0.to_str().unwrap()
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.0);
    }
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn simulate_example_reaches_prey_only() {
    let scratch = Scratch::new("sim-e2");
    let out = bin()
        .args(["simulate", "--preset", "table1", "--init", "0.2,0.1,0.01,0.01"])
        .args(["--out", scratch.arg()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(
        stdout(&out).contains("equilibrium E2"),
        "stdout: {}",
        stdout(&out)
    );
    assert!(scratch.path("trajectory.csv").is_file());
}

#[test]
fn simulate_near_hopf_reports_a_cycle() {
    let scratch = Scratch::new("sim-cycle");
    let out = bin()
        .args(["simulate", "--preset", "table2", "--set", "c=0.037", "--init", "near-E4"])
        .args(["--out", scratch.arg()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("limit_cycle"), "stdout: {}", stdout(&out));
}

#[test]
fn missing_init_is_a_config_error() {
    let scratch = Scratch::new("sim-noinit");
    let out = bin()
        .args(["simulate", "--preset", "table1", "--out", scratch.arg()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("missing required --init"), "stderr: {err}");
    assert!(err.contains("usage:"), "stderr: {err}");
}

#[test]
fn unknown_preset_is_a_config_error() {
    let scratch = Scratch::new("bad-preset");
    let out = bin()
        .args(["analyze", "--preset", "table9", "--out", scratch.arg()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("table9"), "stderr: {}", stderr(&out));
}

#[test]
fn analyze_reports_no_interior_at_heavy_juvenile_mortality() {
    let scratch = Scratch::new("an-d2");
    let out = bin()
        .args(["analyze", "--set", "d2=10", "--out", scratch.arg()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(
        stdout(&out).contains("no interior equilibria"),
        "stdout: {}",
        stdout(&out)
    );
}

#[test]
fn verify_transcritical_prints_threshold_and_passes() {
    let scratch = Scratch::new("verify-bp");
    let out = bin()
        .args(["verify", "--transcritical", "--preset", "table1", "--set", "b=0.114706"])
        .args(["--out", scratch.arg()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("a2t=0.625 PASS"), "stdout: {}", stdout(&out));
}

#[test]
fn continue_reports_the_hopf_with_lyapunov_quantity() {
    let scratch = Scratch::new("cont-c");
    let out = bin()
        .args(["continue", "--preset", "table2", "--free", "c", "--range", "0.02:0.06"])
        .args(["--out", scratch.arg()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("H c=0.0359834"), "stdout: {text}");
    assert!(text.contains("l1="), "stdout: {text}");
    assert!(scratch.path("curve.csv").is_file());
    assert!(scratch.path("specials.csv").is_file());
}

#[test]
fn repeated_runs_emit_identical_bytes() {
    let first = Scratch::new("det-1");
    let second = Scratch::new("det-2");
    for scratch in [&first, &second] {
        let out = bin()
            .args(["continue", "--preset", "table2", "--free", "c", "--range", "0.02:0.06"])
            .args(["--out", scratch.arg()])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    }
    for name in ["curve.csv", "specials.csv"] {
        let a = fs::read(first.path(name)).unwrap();
        let b = fs::read(second.path(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn config_file_feeds_defaults_and_flags_override() {
    let scratch = Scratch::new("config");
    let config = scratch.path("run.json");
    fs::write(&config, r#"{ "params": { "a1": 0.3 } }"#).unwrap();

    let from_file = bin()
        .args(["analyze", "--config", config.to_str().unwrap(), "--out", scratch.arg()])
        .output()
        .unwrap();
    assert_eq!(from_file.status.code(), Some(0), "stderr: {}", stderr(&from_file));
    assert!(stdout(&from_file).contains("a1=0.3"), "stdout: {}", stdout(&from_file));

    let overridden = bin()
        .args(["analyze", "--config", config.to_str().unwrap(), "--set", "a1=0.5"])
        .args(["--out", scratch.arg()])
        .output()
        .unwrap();
    assert_eq!(overridden.status.code(), Some(0));
    assert!(stdout(&overridden).contains("a1=0.5"), "stdout: {}", stdout(&overridden));
}

#[test]
fn unknown_config_key_is_rejected() {
    let scratch = Scratch::new("config-bad");
    let config = scratch.path("run.json");
    fs::write(&config, r#"{ "paramz": { "a1": 0.3 } }"#).unwrap();
    let out = bin()
        .args(["analyze", "--config", config.to_str().unwrap(), "--out", scratch.arg()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "stdout: {}", stdout(&out));
}

#[test]
fn normal_form_emits_parseable_json() {
    let scratch = Scratch::new("nf");
    let out = bin()
        .args(["normal-form", "--preset", "table2", "--at", "c=0.03598345"])
        .args(["--out", scratch.arg()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = fs::read_to_string(scratch.path("normal_form.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(json["l1"].as_f64().unwrap() < 0.0);
    assert!(json["beta2"].as_f64().unwrap() < 0.0);
}

#[test]
fn reproduce_rejects_unknown_figures() {
    let scratch = Scratch::new("rep-bad");
    let out = bin()
        .args(["reproduce", "fig11", "--out", scratch.arg()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("fig11"), "stderr: {}", stderr(&out));
}
