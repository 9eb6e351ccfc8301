// SPDX-License-Identifier: Apache-2.0

//! End-to-end checks of the `macrolab` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn macrolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_macrolab")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("macrolab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn verify_adn_reports_the_final_determinant() {
    let out = macrolab(&["verify-adn"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["pass"], true);
    assert_eq!(v["command"], "verify-adn");
}

#[test]
fn sign_mutation_fails_with_exit_one() {
    let out = macrolab(&["verify-adn", "--mutation", "M+:2"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["pass"], false);
}

#[test]
fn check_moments_passes_on_the_default_grid() {
    let out = macrolab(&["check-moments"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["pass"], true);
}

#[test]
fn zero_step_simulation_writes_one_trace_row() {
    let out_path = scratch("sim.json");
    let trace = scratch("sim.csv");
    let out = macrolab(&[
        "simulate",
        "--shape",
        "spheroid",
        "--refine",
        "0",
        "--grid",
        "6",
        "--steps",
        "0",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&trace).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("step,time,mass,energy,angular_momentum_1"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(macrolab(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(macrolab(&["check-moments", "--bogus"]).status.code(), Some(2));
    assert_eq!(macrolab(&["simulate", "--shape", "torus", "--steps", "0"]).status.code(), Some(2));
    assert_eq!(macrolab(&["--help"]).status.code(), Some(0));
}

#[test]
fn unknown_config_key_is_rejected() {
    let cfg = scratch("bad.cfg");
    std::fs::write(&cfg, "grid = 8\nthreads = 4\n").unwrap();
    let out = macrolab(&["check-moments", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("threads"));
}

#[test]
fn config_file_values_are_overridden_by_flags() {
    let cfg = scratch("good.cfg");
    std::fs::write(&cfg, "# velocity grid\ngrid = 10\nseed = 4\n").unwrap();
    let out = macrolab(&["check-moments", "--config", cfg.to_str().unwrap(), "--seed", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["config"]["grid"], 10);
    assert_eq!(v["config"]["seed"], 5);
}

#[test]
fn reports_are_deterministic() {
    let path = scratch("rep.json");
    let p = path.to_str().unwrap();
    let args = ["simulate", "--shape", "ball", "--refine", "0", "--grid", "6", "--steps", "3", "--out", p];
    assert_eq!(macrolab(&args).status.code(), Some(0));
    let first = std::fs::read(&path).unwrap();
    assert_eq!(macrolab(&args).status.code(), Some(0));
    assert_eq!(first, std::fs::read(&path).unwrap());
}
