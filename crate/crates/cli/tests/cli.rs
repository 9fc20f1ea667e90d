//! End-to-end tests against the built binary.

use std::process::{Command, Output};

fn prolim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prolim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

#[test]
fn char_eval_prints_the_unit_imaginary() {
    let out = prolim(&["char-eval", "--p", "2", "--t", "0.5", "--x", "0", "--n", "1"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "0+1i");
}

#[test]
fn char_eval_kernel_point_is_one() {
    let out = prolim(&["char-eval", "--p", "3", "--t", "1", "--x", "1", "--n", "7"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "1+0i");
}

#[test]
fn padic_arith_carries_in_base_two() {
    let out = prolim(&["padic-arith", "--p", "2", "add", "1|0", "1|0"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "0 1|0");

    let out = prolim(&["padic-arith", "--p", "5", "mul", "7", "6"]);
    assert_eq!(stdout(&out).trim(), "2 3 1|0");

    // -1 in base 3 is the all-twos stream
    let out = prolim(&["padic-arith", "--p", "3", "neg", "1|0"]);
    assert_eq!(stdout(&out).trim(), "|2");

    // periodic tails are exact rationals: |0 1 in base 5 is -5/24, and
    // 3 - (-5/24) = 77/24 has digits 3 4 then the repeating block 4 3
    let out = prolim(&["padic-arith", "--p", "5", "sub", "3|0", "|0 1"]);
    assert_eq!(stdout(&out).trim(), "3 4|4 3");
    let out = prolim(&["padic-arith", "--p", "5", "mul", "|0 1", "24"]);
    assert_eq!(stdout(&out).trim(), "0|4");
}

#[test]
fn coherence_check_reports_and_passes() {
    let out = prolim(&[
        "coherence-check",
        "--kind",
        "power-map-tower",
        "--p",
        "2",
        "--budget",
        "100",
        "--seed",
        "0",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("\"command\": \"coherence-check\""));
    assert!(text.contains("\"pass\": true"));
    assert!(text.contains("max_deviation"));
}

#[test]
fn output_is_byte_identical_for_identical_requests() {
    let args = [
        "boman-probe",
        "--factors",
        "4",
        "--trials",
        "5",
        "--seed",
        "7",
    ];
    let a = prolim(&args);
    let b = prolim(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn planted_discontinuity_fails_with_exit_one() {
    let out = prolim(&[
        "boman-probe",
        "--factors",
        "10",
        "--trials",
        "50",
        "--seed",
        "7",
        "--plant-discontinuity",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("\"pass\": false"));
}

#[test]
fn solenoid_leaf_emits_csv_with_header() {
    let out = prolim(&[
        "solenoid-leaf",
        "--p",
        "2",
        "--levels",
        "2",
        "--samples",
        "3",
        "--range",
        "0:1",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("s,level,angle"));
    assert_eq!(lines.count(), 6);
}

#[test]
fn holonomy_and_lambda_cert_work_from_graph_files() {
    let dir = std::env::temp_dir().join("prolim-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let graph = dir.join("graph.json");
    std::fs::write(
        &graph,
        r#"{"edges":[{"kind":"line","id":"e1","from":[0,0],"to":[1,0]}]}"#,
    )
    .unwrap();

    let out = prolim(&[
        "holonomy",
        "--graph",
        graph.to_str().unwrap(),
        "--form",
        "1,0",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("edge,re,im\n"));
    assert!(text.contains("e1,0.540302305868,0.841470984808"));

    let out = prolim(&[
        "lambda-cert",
        "--graph",
        graph.to_str().unwrap(),
        "--form",
        "1,0",
        "--character",
        "e1:3",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("\"lambda\": 3.0"));
    assert!(text.contains("\"pass\": true"));
}

#[test]
fn parse_errors_exit_two() {
    // unknown flag
    let out = prolim(&["char-eval", "--p", "2", "--t", "0", "--n", "1", "--bogus", "1"]);
    assert_eq!(out.status.code(), Some(2));

    // malformed digit stream
    let out = prolim(&["padic-arith", "--p", "2", "add", "x|0", "1|0"]);
    assert_eq!(out.status.code(), Some(2));

    // bad family kind
    let out = prolim(&["coherence-check", "--kind", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));

    // digit out of range for the base
    let out = prolim(&["padic-arith", "--p", "2", "add", "5|0", "1|0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn prolim_tol_env_var_is_honored() {
    let dir = std::env::temp_dir().join("prolim-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let graph = dir.join("graph2.json");
    std::fs::write(
        &graph,
        r#"{"edges":[{"kind":"line","id":"e1","from":[0,0],"to":[1,0]}]}"#,
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_prolim"))
        .args(["holonomy", "--graph", graph.to_str().unwrap(), "--form", "x0,0"])
        .env("PROLIM_TOL", "1e-6")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("edge,re,im\n"));
}
