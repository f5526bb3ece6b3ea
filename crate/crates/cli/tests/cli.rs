use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_implosion"))
        .arg("--out-dir")
        .arg(dir)
        .args(args)
        .output()
        .expect("spawn implosion")
}

fn stdout_field(out: &Output, key: &str) -> f64 {
    let text = String::from_utf8_lossy(&out.stdout);
    let line = text.lines().find(|l| l.starts_with(key)).unwrap_or_else(|| panic!("no {key} in {text}"));
    line[key.len()..].trim().parse().unwrap()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn k_at_r3_is_three() {
    let d = tempfile::tempdir().unwrap();
    let out = run(d.path(), &["k", "--gamma", "5/3", "--r", "1.101020514433643"]);
    assert!(out.status.success());
    assert!((stdout_field(&out, "k ") - 3.0).abs() < 1e-9);
}

#[test]
fn k_at_one_is_one() {
    let d = tempfile::tempdir().unwrap();
    let out = run(d.path(), &["k", "--r", "1"]);
    assert!(out.status.success());
    assert!((stdout_field(&out, "k ") - 1.0).abs() < 1e-9);
}

#[test]
fn k_outside_domain_exits_one_with_manifest() {
    let d = tempfile::tempdir().unwrap();
    let out = run(d.path(), &["k", "--r", "1.3"]);
    assert_eq!(out.status.code(), Some(1));
    let m = manifest(d.path());
    assert_eq!(m["exit_code"], 1);
    assert!(m["error"].is_string());
}

#[test]
fn k_sweep_writes_rows() {
    let d = tempfile::tempdir().unwrap();
    assert!(run(d.path(), &["k", "--sweep", "1.0", "1.2", "21"]).status.success());
    let text = std::fs::read_to_string(d.path().join("k_sweep.csv")).unwrap();
    assert_eq!(text.lines().count(), 22);
}

#[test]
fn taylor_order_one_matches_first_order_data() {
    let d = tempfile::tempdir().unwrap();
    assert!(run(d.path(), &["taylor", "--r", "1.13", "--order", "1"]).status.success());
    let text = std::fs::read_to_string(d.path().join("taylor.csv")).unwrap();
    let row: Vec<f64> = text.lines().nth(2).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(row[0], 1.0);
    assert!((row[1] - -2.114734025829285).abs() < 1e-12);
    assert!((row[2] - 1.5975140858757486).abs() < 1e-12);
}

#[test]
fn taylor_resonance_fails_unless_allowed() {
    let d = tempfile::tempdir().unwrap();
    let r3 = "1.1010205144336439";
    let out = run(d.path(), &["taylor", "--r", r3, "--order", "4"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(d.path(), &["taylor", "--r", r3, "--order", "4", "--allow-resonant"]);
    assert!(out.status.success());
}

#[test]
fn barriers_reversed_sign_exits_disproved() {
    let d = tempfile::tempdir().unwrap();
    let out = run(d.path(), &["barriers", "--r", "1.13", "--certify", "--reverse-sign", "--t-max", "0.06"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn barriers_on_short_domain_are_proved() {
    let d = tempfile::tempdir().unwrap();
    let out = run(d.path(), &["barriers", "--r", "1.13", "--certify", "--full-domain", "--t-max", "0.06"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(d.path());
    for c in m["results"]["certificates"].as_array().unwrap() {
        assert_eq!(c["verdict"], "Proved");
        assert!(d.path().join(c["file"].as_str().unwrap()).exists());
    }
    assert!(d.path().join("nullclines.csv").exists());
}

#[test]
fn portrait_row_count_matches_grid() {
    let d = tempfile::tempdir().unwrap();
    assert!(run(d.path(), &["portrait", "--r", "1.13", "--grid", "-3:3:11,-2:2:7"]).status.success());
    let text = std::fs::read_to_string(d.path().join("portrait.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 11 * 7);
}

#[test]
fn shoot_with_loose_tolerance_returns_midpoint() {
    let d = tempfile::tempdir().unwrap();
    assert!(run(d.path(), &["shoot", "--gamma", "7/5", "--tol", "10"]).status.success());
    let rep: Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("shoot.json")).unwrap()).unwrap();
    assert_eq!(rep["iterations"], 0);
    let (a, b) = (rep["bracket"][0].as_f64().unwrap(), rep["bracket"][1].as_f64().unwrap());
    assert!((rep["r"].as_f64().unwrap() - 0.5 * (a + b)).abs() < 1e-15);
}

#[test]
fn manifest_is_deterministic() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    for d in [&d1, &d2] {
        assert!(run(d.path(), &["portrait", "--r", "1.13", "--grid", "-1:1:3,-1:1:3"]).status.success());
    }
    let strip = |m: &mut Value| {
        m["out_dir"] = Value::Null;
        m["parameters"]["out_dir"] = Value::Null;
    };
    let (mut a, mut b) = (manifest(d1.path()), manifest(d2.path()));
    strip(&mut a);
    strip(&mut b);
    assert_eq!(a, b);
}

#[test]
fn env_var_sets_output_directory() {
    let d = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_implosion"))
        .env("IMPLOSION_OUT_DIR", d.path())
        .args(["k", "--r", "1.13"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(d.path().join("manifest.json").exists());
}

#[test]
fn reconstruct_writes_profile_and_physical() {
    let d = tempfile::tempdir().unwrap();
    let out = run(d.path(), &["reconstruct", "--r", "1.1128161296", "--t", "0,0.5", "--R", "0.1:1:5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(d.path().join("physical.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 5);
    assert!(d.path().join("profile.csv").exists());
}
