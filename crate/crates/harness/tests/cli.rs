use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn brsp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_brsp")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn accepted_session_exits_zero() {
    let out = brsp(&["--seed", "3", "rsp", "run", "--rounds", "200", "--basis", "Z"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out);
    assert_eq!(report["outcome"]["branch"], "z");
    assert_eq!(report["seed"], 3);
}

#[test]
fn protocol_err_exits_two() {
    let out = brsp(&["rsp", "run", "--prover", "zonly", "--rounds", "2000", "--delta", "0.05"]);
    assert_eq!(code(&out), 2);
    assert_eq!(json(&out)["outcome"]["branch"], "err");
}

#[test]
fn rejected_delegation_exits_two() {
    assert_eq!(code(&brsp(&["dqc", "run", "--server", "flipall"])), 2);
    let out = brsp(&["dqc", "run", "--pattern", "cz"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["verdict"], "accept");
}

#[test]
fn tool_errors_exit_one() {
    assert_eq!(code(&brsp(&["experiment", "run", "no-such"])), 1);
    assert_eq!(code(&brsp(&["experiment", "run", "fk-flipall", "--trials", "0"])), 1);
    assert_eq!(code(&brsp(&["rsp", "run", "--rounds", "0"])), 1);
    assert_eq!(code(&brsp(&["rigidity", "--z", "/nonexistent", "--x", "/nonexistent"])), 1);
    assert_eq!(code(&brsp(&["hardcore-oracle", "--n", "4", "--d-hat", "10x1"])), 1);
}

#[test]
fn rigidity_reads_matrix_files() {
    let dir = tempfile::tempdir().unwrap();
    let z = dir.path().join("z.txt");
    let x = dir.path().join("x.txt");
    let psi = dir.path().join("psi.txt");
    fs::write(&z, "1 0\n0 -1\n").unwrap();
    fs::write(&x, "# sigma_x\n0 1\n1 0\n").unwrap();
    fs::write(&psi, "0.6 0:0.8\n").unwrap();
    let out = brsp(&["rigidity", "--z", z.to_str().unwrap(), "--x", x.to_str().unwrap(), "--state", psi.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out);
    assert!(report["x_residual"].as_f64().unwrap() < 1e-12);
    assert!(report["z_residual_state"].as_f64().unwrap() < 1e-12);
}

#[test]
fn hardcore_oracle_with_explicit_matrix() {
    let out = brsp(&["hardcore-oracle", "--q", "17", "--ell", "1", "--n", "4", "--modulus", "2", "--c", "1,2,3,4", "--d-hat", "1111"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let table = &json(&out)["table"];
    assert!(table["mean_distance"].as_f64().unwrap() <= table["max_distance"].as_f64().unwrap());
}

#[test]
fn reports_go_to_files_in_either_format() {
    let dir = tempfile::tempdir().unwrap();
    let json_path = dir.path().join("r.json");
    let csv_path = dir.path().join("r.csv");
    let args = ["--seed", "4", "experiment", "run", "fk-flipall", "--trials", "5"];
    let out = brsp(&[&args[..], &["--report", json_path.to_str().unwrap()]].concat());
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let report: Value = serde_json::from_str(&fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(report["statistics"]["reject_rate"], 1.0);
    assert_eq!(report["seed"], 4);

    let out = brsp(&[&args[..], &["--format", "csv", "--report", csv_path.to_str().unwrap()]].concat());
    assert_eq!(code(&out), 0);
    let csv = fs::read_to_string(&csv_path).unwrap();
    assert!(csv.starts_with("index,seed,outcome,value,detail"));
    assert_eq!(csv.lines().count(), 6);

    let out = brsp(&["--format", "csv", "rsp", "run", "--rounds", "100"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("config.max_rounds,100"));
}

#[test]
fn experiment_list_names_everything() {
    let out = brsp(&["experiment", "list"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["qrac-optimum", "theta-uniformity", "rsp-fk-distribution", "transport-determinism"] {
        assert!(text.contains(name));
    }
}
