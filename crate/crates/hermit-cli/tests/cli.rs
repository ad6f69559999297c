//! End-to-end tests of the hermit binary: exit codes, JSON output, file
//! round-trips, and the closed verification loop.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn hermit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hermit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn hermit_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hermit"))
        .args(args)
        .env(key, value)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).expect("write test file");
}

const S_MATRIX: &str =
    r#"{ "dim": 2, "entries": [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 1.0]] }"#;
const IDENTITY2: &str =
    r#"{ "dim": 2, "entries": [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]] }"#;
const X_MATRIX: &str =
    r#"{ "dim": 2, "entries": [[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 0.0]] }"#;
const CNOT_MATRIX: &str = r#"{ "dim": 4, "entries": [
    [1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0],
    [0.0, 0.0], [1.0, 0.0], [0.0, 0.0], [0.0, 0.0],
    [0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0],
    [0.0, 0.0], [0.0, 0.0], [1.0, 0.0], [0.0, 0.0] ] }"#;
const CZ_MATRIX: &str = r#"{ "dim": 4, "entries": [
    [1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0],
    [0.0, 0.0], [1.0, 0.0], [0.0, 0.0], [0.0, 0.0],
    [0.0, 0.0], [0.0, 0.0], [1.0, 0.0], [0.0, 0.0],
    [0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [-1.0, 0.0] ] }"#;

#[test]
fn synth1q_factors_s_into_two_reflections_with_quarter_pi_phase() {
    let dir = TempDir::new().unwrap();
    let m = dir.path().join("s.json");
    write(&m, S_MATRIX);
    let out = hermit(&["--json", "synth1q", "--matrix", m.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    let ops = v["circuit"]["ops"].as_array().unwrap();
    assert_eq!(ops.len(), 2);
    assert!(ops.iter().all(|op| op["kind"] == "pi"));
    let phase = v["report"]["global_phase"].as_f64().unwrap();
    assert!((phase - std::f64::consts::FRAC_PI_4).abs() <= 1e-12, "phase {phase}");
    assert!(v["report"]["error"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn synth1q_handles_the_identity() {
    let dir = TempDir::new().unwrap();
    let m = dir.path().join("id.json");
    write(&m, IDENTITY2);
    let out = hermit(&["--json", "synth1q", "--matrix", m.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert!(v["report"]["error"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn synth1q_accepts_axis_angle_input() {
    let out = hermit(&["synth1q", "--axis", "1.0", "-0.5", "--angle", "2.0"]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("Pi("), "{text}");
}

#[test]
fn emitted_circuits_reverify_against_their_source() {
    let dir = TempDir::new().unwrap();
    let m = dir.path().join("s.json");
    let c = dir.path().join("s.circuit.json");
    write(&m, S_MATRIX);
    let out = hermit(&[
        "synth1q",
        "--matrix",
        m.to_str().unwrap(),
        "--out",
        c.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let out = hermit(&[
        "verify",
        "--circuit",
        c.to_str().unwrap(),
        "--matrix",
        m.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stdout: {}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn synth_cu4_compiles_cnot_with_ten_cnots_all_to_all() {
    let dir = TempDir::new().unwrap();
    let m = dir.path().join("cnot.json");
    write(&m, CNOT_MATRIX);
    let out = hermit(&[
        "--json",
        "synth-cu4",
        "--matrix",
        m.to_str().unwrap(),
        "--layout",
        "a2a",
        "--basis",
        "zy",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["report"]["counts"]["cnot"].as_u64().unwrap(), 10);
    assert!(v["report"]["error"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn synth_cu4_lnn_layouts_use_thirteen_cnots() {
    let dir = TempDir::new().unwrap();
    let m = dir.path().join("cz.json");
    write(&m, CZ_MATRIX);
    for layout in ["lnn-first", "lnn-mid", "lnn-last"] {
        let out = hermit(&[
            "--json",
            "synth-cu4",
            "--matrix",
            m.to_str().unwrap(),
            "--layout",
            layout,
            "--basis",
            "pi",
        ]);
        assert_eq!(code(&out), 0, "{layout}: {}", String::from_utf8_lossy(&out.stderr));
        let v = stdout_json(&out);
        assert_eq!(v["report"]["counts"]["cnot"].as_u64().unwrap(), 13, "{layout}");
        assert_eq!(v["circuit"]["connectivity"], "lnn", "{layout}");
        assert!(v["report"]["error"].as_f64().unwrap() <= 1e-9, "{layout}");
    }
}

#[test]
fn verify_rejects_a_wrong_target_with_exit_one() {
    let dir = TempDir::new().unwrap();
    let c = dir.path().join("cnot.circuit.json");
    let m = dir.path().join("cz.json");
    write(
        &c,
        r#"{ "width": 2, "connectivity": "all",
             "ops": [ { "kind": "cnot", "qubits": [0, 1] } ] }"#,
    );
    write(&m, CZ_MATRIX);
    let out = hermit(&[
        "verify",
        "--circuit",
        c.to_str().unwrap(),
        "--matrix",
        m.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("equivalent: false"), "{text}");
}

/// A circuit that misses X by a 1e-7 z rotation passes a loose
/// tolerance and fails a strict one.
fn near_x_circuit(dir: &Path) -> (PathBuf, PathBuf) {
    let c = dir.join("nearx.circuit.json");
    let m = dir.join("x.json");
    write(
        &c,
        r#"{ "width": 1, "connectivity": "all",
             "ops": [ { "kind": "rot", "qubits": [0],
                        "params": { "lambda": 2.0e-7, "axis": [0.0, 0.0, 1.0] } },
                      { "kind": "x", "qubits": [0] } ] }"#,
    );
    write(&m, X_MATRIX);
    (c, m)
}

#[test]
fn verify_tolerance_flag_separates_loose_from_strict() {
    let dir = TempDir::new().unwrap();
    let (c, m) = near_x_circuit(dir.path());
    let loose = hermit(&[
        "verify", "--circuit", c.to_str().unwrap(), "--matrix", m.to_str().unwrap(),
        "--tol", "1e-6",
    ]);
    assert_eq!(code(&loose), 0);
    let strict = hermit(&[
        "verify", "--circuit", c.to_str().unwrap(), "--matrix", m.to_str().unwrap(),
        "--tol", "1e-15",
    ]);
    assert_eq!(code(&strict), 1);
}

#[test]
fn hermit_tol_env_var_sets_the_default_tolerance() {
    let dir = TempDir::new().unwrap();
    let (c, m) = near_x_circuit(dir.path());
    let args = ["verify", "--circuit", c.to_str().unwrap(), "--matrix", m.to_str().unwrap()];
    assert_eq!(code(&hermit_env(&args, "HERMIT_TOL", "1e-6")), 0);
    assert_eq!(code(&hermit_env(&args, "HERMIT_TOL", "1e-15")), 1);
    let bad = hermit_env(&args, "HERMIT_TOL", "not-a-number");
    assert_eq!(code(&bad), 2);
}

#[test]
fn builtin_piped_through_count_reports_seven_seven_two() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("tof.json");
    let out = hermit(&["builtin", "toffoli_minimal_hermitian", "--out", f.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let out = hermit(&["--json", "count", "--circuit", f.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["cnot"].as_u64().unwrap(), 7);
    assert_eq!(v["pi"].as_u64().unwrap(), 7);
    assert_eq!(v["h"].as_u64().unwrap(), 2);
}

#[test]
fn count_of_an_empty_circuit_is_all_zeros() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("empty.json");
    write(&f, r#"{ "width": 1, "connectivity": "all", "ops": [] }"#);
    let out = hermit(&["--json", "count", "--circuit", f.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert!(v.as_object().unwrap().values().all(|n| n.as_u64() == Some(0)));
}

#[test]
fn hermitize_makes_a_t_circuit_hermitian() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("t.json");
    write(
        &f,
        r#"{ "width": 1, "connectivity": "all",
             "ops": [ { "kind": "phase", "qubits": [0],
                        "params": { "lambda": 0.7853981633974483 } } ] }"#,
    );
    let out = hermit(&[
        "--json", "hermitize", "--circuit", f.to_str().unwrap(), "--set", "Hermitian-HPiT-X",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    let kinds: Vec<&str> =
        v["circuit"]["ops"].as_array().unwrap().iter().map(|o| o["kind"].as_str().unwrap()).collect();
    assert_eq!(kinds, ["x", "pi"]);
    assert!(v["report"]["error"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn unknown_names_and_bad_files_exit_two() {
    let out = hermit(&["builtin", "no_such_circuit"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("known:"));

    let dir = TempDir::new().unwrap();
    let f = dir.path().join("t.json");
    write(&f, r#"{ "width": 1, "connectivity": "all", "ops": [] }"#);
    let out = hermit(&["hermitize", "--circuit", f.to_str().unwrap(), "--set", "bogus"]);
    assert_eq!(code(&out), 2);

    let out = hermit(&["count", "--circuit", "/nonexistent/path.json"]);
    assert_eq!(code(&out), 2);

    let bad = dir.path().join("bad.json");
    write(&bad, r#"{ "dim": 2, "entries": [[2.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]] }"#);
    let out = hermit(&["synth1q", "--matrix", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("unitary"));
}

#[test]
fn missing_required_arguments_exit_two() {
    let out = hermit(&["synth1q"]);
    assert_eq!(code(&out), 2);
    let out = hermit(&["synth-cu4", "--layout", "sideways"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn batch_mode_writes_one_circuit_per_matrix_and_reports_failures() {
    let dir = TempDir::new().unwrap();
    let batch = dir.path().join("inputs");
    let outputs = dir.path().join("outputs");
    std::fs::create_dir(&batch).unwrap();
    write(&batch.join("a.json"), S_MATRIX);
    write(&batch.join("b.json"), X_MATRIX);
    write(
        &batch.join("c.json"),
        r#"{ "dim": 2, "entries": [[2.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]] }"#,
    );
    let out = hermit(&[
        "--json",
        "synth1q",
        "--batch",
        batch.to_str().unwrap(),
        "--out-dir",
        outputs.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2, "one input is non-unitary");
    let v = stdout_json(&out);
    let results = v["results"].as_array().unwrap();
    assert_eq!(results.len(), 3);
    assert_eq!(results[0]["ok"], true);
    assert_eq!(results[1]["ok"], true);
    assert_eq!(results[2]["ok"], false);
    assert!(outputs.join("a.circuit.json").exists());
    assert!(outputs.join("b.circuit.json").exists());
    assert!(!outputs.join("c.circuit.json").exists());

    // All-good batch exits zero.
    std::fs::remove_file(batch.join("c.json")).unwrap();
    let out = hermit(&[
        "synth1q",
        "--batch",
        batch.to_str().unwrap(),
        "--out-dir",
        outputs.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
}

#[test]
fn batch_cu4_runs_every_layout_file() {
    let dir = TempDir::new().unwrap();
    let batch = dir.path().join("inputs");
    std::fs::create_dir(&batch).unwrap();
    write(&batch.join("cnot.json"), CNOT_MATRIX);
    write(&batch.join("cz.json"), CZ_MATRIX);
    let out = hermit(&[
        "synth-cu4",
        "--batch",
        batch.to_str().unwrap(),
        "--layout",
        "lnn-mid",
        "--basis",
        "cpi",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    // Outputs default to the batch directory and are skipped on re-run.
    assert!(batch.join("cnot.circuit.json").exists());
    assert!(batch.join("cz.circuit.json").exists());
    let again = hermit(&[
        "synth-cu4",
        "--batch",
        batch.to_str().unwrap(),
        "--layout",
        "lnn-mid",
        "--basis",
        "cpi",
    ]);
    assert_eq!(code(&again), 0);
}

#[test]
fn json_and_text_outputs_agree_on_the_verdict() {
    let dir = TempDir::new().unwrap();
    let (c, m) = near_x_circuit(dir.path());
    let args = [
        "verify", "--circuit", c.to_str().unwrap(), "--matrix", m.to_str().unwrap(),
        "--tol", "1e-6",
    ];
    let text = hermit(&args);
    let mut json_args = vec!["--json"];
    json_args.extend_from_slice(&args);
    let json = hermit(&json_args);
    assert_eq!(code(&text), code(&json));
    let v = stdout_json(&json);
    assert_eq!(v["equivalent"], true);
    assert!(v["error"].as_f64().unwrap() <= 1e-6);
    assert!(v["error"].as_f64().unwrap() >= 1e-8);
}
