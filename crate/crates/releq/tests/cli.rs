use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scratch(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("releq-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn releq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_releq")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("config.json");
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn seed_reports_the_rotor_oracle() {
    let dir = scratch("seed");
    let cfg = write_config(&dir, r#"{"system": {"name": "planar_rotor"}}"#);
    let out = releq(&["seed", &cfg, "--out", dir.to_str().unwrap(), "--seed-guess", "u=1.3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let field = |key: &str| -> f64 {
        let line = text.lines().find(|l| l.trim_start().starts_with(key)).unwrap();
        line.split(':').nth(1).unwrap().trim().trim_matches(|c| c == '[' || c == ']').parse().unwrap()
    };
    assert!((field("u0:") - 1.0).abs() < 1e-10, "{text}");
    assert!((field("det_delta:") - 4.0).abs() < 1e-6, "{text}");
    assert_eq!(fs::read_to_string(dir.join("analysis.txt")).unwrap(), text);
}

#[test]
fn zero_tau_max_writes_the_root_only() {
    let dir = scratch("tau0");
    let cfg = write_config(&dir, r#"{"system": {"name": "spherical_pendulum"}, "bifurcation": {"tau_max": 0}}"#);
    let out = releq(&["branch", &cfg, "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.join("branch_mu1_0.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(String::from_utf8(out.stdout).unwrap().contains("bifurcation.tau_max = 0.0"));
}

#[test]
fn exit_codes_separate_input_and_numerical_failures() {
    let dir = scratch("codes");
    let d = dir.to_str().unwrap();
    assert_eq!(releq(&["verify", "/nonexistent/config.json", "--out", d]).status.code(), Some(1));

    let bad = write_config(&dir, r#"{"system": {"name": "planar_rotor"}, "numerics": {"bogus": 1}}"#);
    let out = releq(&["verify", &bad, "--out", d]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));

    let inverted = write_config(&dir, r#"{"system": {"name": "planar_rotor", "params": {"k": -1}}}"#);
    let out = releq(&["seed", &inverted, "--out", d]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("NewtonDiverged"));

    let central = write_config(&dir, r#"{"system": {"name": "so3_central_force"}}"#);
    assert_eq!(releq(&["verify", &central, "--out", d]).status.code(), Some(0));
    assert_eq!(releq(&["seed", &central, "--out", d]).status.code(), Some(3));
}

#[test]
fn stability_restamps_existing_csv() {
    let dir = scratch("stab");
    let d = dir.to_str().unwrap();
    let cfg = write_config(&dir, r#"{"system": {"name": "planar_rotor"}, "bifurcation": {"n_steps": 4}}"#);
    assert_eq!(releq(&["branch", &cfg, "--out", d]).status.code(), Some(0));
    let before = fs::read_to_string(dir.join("branch_mu1_0.csv")).unwrap();
    assert!(before.contains("NotComputed"));
    let out = releq(&["stability", &cfg, "--out", d]);
    assert_eq!(out.status.code(), Some(0));
    let after = fs::read_to_string(dir.join("branch_mu1_0.csv")).unwrap();
    assert_eq!(after.matches("PositiveDefinite").count(), 5);
    assert_eq!(before.replace("NotComputed", "PositiveDefinite"), after);
}
