//! End-to-end tests of the binary: file-driven values, exit codes,
//! determinism and report round-trips.

use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn testdata(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("testdata");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coupcap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(output: &Output) -> Value {
    assert!(
        output.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("report is valid JSON")
}

fn value(report: &Value, key: &str) -> f64 {
    report["values"][key].as_f64().unwrap_or_else(|| {
        panic!("missing value {key} in {report}");
    })
}

#[test]
fn alpha_of_maximally_entangled_file() {
    let out = run(&["alpha", &testdata("max_entangled_2x2.json")]);
    let rep = report(&out);
    assert!((value(&rep, "alpha") - 1.0).abs() < 1e-6);
    assert_eq!(rep["status"], "converged");
}

#[test]
fn alpha_of_separable_file() {
    let out = run(&["alpha", &testdata("separable_2x3.json")]);
    let rep = report(&out);
    assert!((value(&rep, "alpha") - 1.0 / 3.0).abs() < 1e-6);
}

#[test]
fn alpha_of_identity_file() {
    let out = run(&["alpha", &testdata("identity.json")]);
    let rep = report(&out);
    assert!((value(&rep, "alpha") - 1.0).abs() < 1e-6);
}

#[test]
fn beta_on_strict_gap_file() {
    let out = run(&["beta", &testdata("strict_gap.json")]);
    let rep = report(&out);
    assert!((value(&rep, "beta") - 0.25).abs() < 1e-6);
}

#[test]
fn gap_on_faithful_random_file_is_small() {
    let out = run(&["gap", &testdata("identity.json")]);
    let rep = report(&out);
    assert!(value(&rep, "gap").abs() < 1e-6);
}

#[test]
fn gamma_on_strict_gap_file_uses_product_rule() {
    let out = run(&["gamma", &testdata("strict_gap.json")]);
    let rep = report(&out);
    assert_eq!(rep["method"], "exact-product");
    assert!((value(&rep, "gamma") - 0.5).abs() < 1e-9);
}

#[test]
fn gamma_on_entangled_vector_file() {
    let out = run(&["gamma", &testdata("max_entangled_2x2.json")]);
    let rep = report(&out);
    assert_eq!(rep["method"], "exact-2x2-rank-one");
    assert!((value(&rep, "gamma") - 1.0).abs() < 1e-9);
}

#[test]
fn gamma_on_qutrit_projection_reports_an_interval() {
    let out = run(&[
        "gamma",
        &testdata("qutrit_projection.json"),
        "--restarts",
        "8",
        "--seed",
        "5",
    ]);
    let rep = report(&out);
    assert_eq!(rep["method"], "random-search");
    let lower = value(&rep, "gamma_lower");
    let upper = value(&rep, "gamma_upper");
    assert!(lower <= upper + 1e-9);
    // the span is e0 ⊗ {e0, e1} plus e1 ⊗ e2, covered optimally at cost 2/3
    assert!((upper - 2.0 / 3.0).abs() < 1e-7);
    assert!((lower - 2.0 / 3.0).abs() < 1e-6);
}

#[test]
fn strassen_verdicts() {
    let out = run(&["strassen", &testdata("strassen_feasible.json")]);
    let rep = report(&out);
    assert_eq!(rep["verdict"], "feasible");
    assert!(value(&rep, "support_residual") <= 1e-6);

    let out = run(&[
        "strassen",
        &testdata("strassen_infeasible.json"),
        "--emit-witness",
    ]);
    let rep = report(&out);
    assert_eq!(rep["verdict"], "infeasible");
    assert!((value(&rep, "alpha") - 0.5).abs() < 1e-5);
    assert!((value(&rep, "margin") - 0.5).abs() < 1e-5);
    assert!(rep["certificate"]["a"].is_array());
}

#[test]
fn classical_partial_permutation_file() {
    let out = run(&["classical", &testdata("classical_partial_perm.json")]);
    let rep = report(&out);
    assert!((value(&rep, "alpha") - 2.0 / 3.0).abs() < 1e-9);
    assert!((value(&rep, "beta") - 2.0 / 3.0).abs() < 1e-8);
    assert!((value(&rep, "gamma") - 2.0 / 3.0).abs() < 1e-9);
    assert!(rep["plan"].is_array());
    assert!(rep["cover"].is_object());
}

#[test]
fn schmidt_of_tilted_file() {
    let out = run(&["schmidt", &testdata("schmidt_tilted.json")]);
    let rep = report(&out);
    let coeffs = rep["schmidt_coefficients"].as_array().unwrap();
    assert!((coeffs[0].as_f64().unwrap() - 0.8).abs() < 1e-12);
    assert!((coeffs[1].as_f64().unwrap() - 0.6).abs() < 1e-12);
    assert_eq!(value(&rep, "schmidt_rank"), 2.0);
}

#[test]
fn validation_errors_exit_2() {
    let out = run(&["alpha", &testdata("invalid_state.json")]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["alpha", "/nonexistent/problem.json"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["alpha", &testdata("identity.json"), "--bogus"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn iteration_cap_exits_3() {
    let out = run(&[
        "alpha",
        &testdata("max_entangled_2x2.json"),
        "--max-iters",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let rep: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rep["status"], "max-iterations");
}

#[test]
fn identical_seeds_give_identical_value_fields() {
    let a = run(&["alpha", &testdata("max_entangled_2x2.json"), "--seed", "7"]);
    let b = run(&["alpha", &testdata("max_entangled_2x2.json"), "--seed", "7"]);
    let ra = report(&a);
    let rb = report(&b);
    assert_eq!(
        serde_json::to_string(&ra["values"]).unwrap(),
        serde_json::to_string(&rb["values"]).unwrap()
    );
    assert_eq!(
        serde_json::to_string(&ra["residuals"]).unwrap(),
        serde_json::to_string(&rb["residuals"]).unwrap()
    );
}

#[test]
fn report_serialization_round_trips() {
    // a maximal report: witness and certificate matrices included
    let out = run(&[
        "alpha",
        &testdata("max_entangled_2x2.json"),
        "--emit-witness",
    ]);
    let rep = report(&out);
    assert!(rep["witness"].is_array());
    assert!(rep["certificate"]["a"].is_array());
    let text = serde_json::to_string(&rep).unwrap();
    let back: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(rep, back);

    let out = run(&["gap", &testdata("strict_gap.json")]);
    let rep = report(&out);
    let text = serde_json::to_string(&rep).unwrap();
    let back: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(rep, back);
}

#[test]
fn output_flag_writes_file() {
    let dir = std::env::temp_dir().join("coupcap_cli_test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = run(&[
        "alpha",
        &testdata("identity.json"),
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let rep: Value = serde_json::from_str(&text).unwrap();
    assert!((rep["values"]["alpha"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn reference_suite_passes_and_is_deterministic() {
    let out = run(&["paper-examples"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let out2 = run(&["paper-examples"]);
    assert_eq!(out.stdout, out2.stdout);
}

#[test]
fn reference_suite_reports_failures_under_degraded_tolerance() {
    let out = run(&["paper-examples", "--tol", "1e-2"]);
    assert_eq!(out.status.code(), Some(4));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(
        text.lines()
            .any(|l| l.starts_with("FAIL") && l.contains("tilted projection at t = 0.8")),
        "expected the tilted-capacity case to fail with a reported delta:\n{text}"
    );
}
