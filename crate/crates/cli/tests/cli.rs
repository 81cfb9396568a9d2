//! End-to-end runs of the `hardsphere` binary.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hardsphere"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hardsphere-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_config(name: &str, json: &str) -> (Output, PathBuf) {
    let dir = scratch(name);
    let path = dir.join("config.json");
    fs::write(&path, json).unwrap();
    let out = bin().arg("--config").arg(&path).arg("--out").arg(dir.join("out")).output().unwrap();
    (out, dir.join("out"))
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn report(dir: &PathBuf) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn coeff_check_preset_passes() {
    let dir = scratch("coeff");
    let out = bin().args(["--preset", "coeff-check", "--out"]).arg(&dir).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&dir);
    assert!(r["results"]["max_rel_error"].as_f64().unwrap() < 1e-10);
    assert_eq!(r["config"]["command"], "coeff-check");
    assert_eq!(r["passed"], true);
}

#[test]
fn rarefactive_preset_reports_no_breakdown() {
    let dir = scratch("rarefactive");
    let out = bin().args(["--preset", "rarefactive", "--out"]).arg(&dir).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&dir);
    for rec in r["results"]["records"].as_array().unwrap() {
        assert_eq!(rec["outcome"], "no breakdown");
    }
    assert!(String::from_utf8_lossy(&out.stdout).contains("no breakdown"));
}

#[test]
fn single_epsilon_sweep_exits_with_two() {
    let preset = include_str!("../presets/pressure-control.json");
    let json = preset.replace("[0.1, 0.01, 0.001, 0.0001]", "[0.1]");
    let (out, _) = run_config("single-eps", &json);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("fit requires ≥ 3 points"), "{}", stderr(&out));
}

#[test]
fn gamma_below_one_exits_with_two() {
    let (out, _) = run_config("gamma", r#"{"command": "coeff-check", "params": {"epsilon": 0.1, "gamma": 0.5}}"#);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("gamma must exceed 1"), "{}", stderr(&out));
}

#[test]
fn misspelled_key_is_located_and_corrected() {
    let (out, _) = run_config("gama", "{\n  \"command\": \"coeff-check\",\n  \"params\": {\"epsilon\": 0.1, \"gama\": 2}\n}");
    assert_eq!(out.status.code(), Some(2));
    let e = stderr(&out);
    assert!(e.contains("line 3") && e.contains("did you mean `gamma`?"), "{e}");
}

#[test]
fn failed_check_exits_with_one() {
    let (out, dir) = run_config(
        "strict",
        r#"{"command": "coeff-check", "params": {"epsilon": 0.1, "gamma": 2}, "coeff_check": {"samples": 5, "tolerance": 1e-30}}"#,
    );
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    assert_eq!(report(&dir)["passed"], false);
}

#[test]
fn unknown_preset_and_missing_source_exit_with_two() {
    let out = bin().args(["--preset", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("coeff-check"));
    assert_eq!(bin().output().unwrap().status.code(), Some(2));
}

#[test]
fn manifest_is_deterministic_and_complete() {
    let dir = scratch("manifest");
    let run = || {
        let out = bin().args(["--preset", "eos-identities", "--out"]).arg(&dir).output().unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        fs::read_to_string(dir.join("manifest.json")).unwrap()
    };
    let first = run();
    let second = run();
    assert_eq!(first, second);
    let m: serde_json::Value = serde_json::from_str(&first).unwrap();
    let files: Vec<&str> = m["files"].as_array().unwrap().iter().map(|f| f["path"].as_str().unwrap()).collect();
    assert_eq!(files, ["eos_table.csv", "report.json"]);
    let header = fs::read_to_string(dir.join("eos_table.csv")).unwrap();
    assert!(header.starts_with("v,rho,pressure,"));
}

#[test]
fn simulate_psystem_writes_trajectory() {
    let (out, dir) = run_config(
        "psystem",
        r#"{
          "command": "simulate-psystem",
          "params": {"epsilon": 0.01, "gamma": 2},
          "simulate_psystem": {
            "grid": {"a": -4, "b": 4, "n": 101},
            "initial": {"kind": "tanh_velocity", "v": 2, "speed": 0.2},
            "t_end": 0.2
          }
        }"#,
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,x,v,u,w,z,y,q,a_eps\n"));
    assert_eq!(report(&dir)["results"]["outcome"], "no breakdown");
}

#[test]
fn simulate_euler_writes_trajectory() {
    let (out, dir) = run_config(
        "euler",
        r#"{
          "command": "simulate-euler",
          "params": {"epsilon": 0.01, "gamma": 2},
          "simulate_euler": {
            "grid": {"a": 0, "b": 1, "n": 64},
            "initial": {"kind": "density_sine", "rho": 0.5, "amplitude": 0.2, "u_amplitude": 0.1},
            "boundary": "periodic",
            "t_end": 0.05
          }
        }"#,
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,x,rho,m,u,w,z,margin\n"));
}
