use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_contact-sim")).args(args).output().unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn write_config(dir: &Path, name: &str, cfg: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    p
}

fn dissipative(t_end: f64, dt: f64) -> Value {
    json!({
        "system": { "catalog": "dissipative-2d" },
        "t0": 0.0, "t_end": t_end, "dt": dt,
        "master_seed": 42,
        "initial_state": [1.0, 0.0, 2.0, 0.0, 0.0]
    })
}

fn sasaki_einstein(t_end: f64, dt: f64) -> Value {
    json!({
        "system": { "catalog": "sasaki-einstein-t11" },
        "T": t_end, "dt": dt,
        "master_seed": 3,
        "initial_state": [1.5707963267948966, 1.5707963267948966, 0.3, -0.4, 1.0]
    })
}

fn json_of(r: &Run) -> Value {
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    serde_json::from_str(&r.stdout).unwrap()
}

#[test]
fn simulate_writes_identical_files() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", &dissipative(0.1, 1e-3));
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let r = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(r.code, 0, "{}", r.stderr);
    }
    let text = std::fs::read(&a).unwrap();
    assert_eq!(text, std::fs::read(&b).unwrap());
    let text = String::from_utf8(text).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,q1,q2,p1,p2,z,lambda");
    assert_eq!(lines.count(), 101);

    let other = run(&["simulate", "--config", cfg.to_str().unwrap(), "--seed", "43"]);
    assert_ne!(other.stdout.as_bytes(), &std::fs::read(&a).unwrap()[..]);
}

#[test]
fn step_that_does_not_divide_the_interval_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", &dissipative(1.0, 3e-3));
    let r = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("dt"), "{}", r.stderr);
}

#[test]
fn malformed_and_missing_configs() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(run(&["simulate", "--config", bad.to_str().unwrap()]).code, 2);
    assert_eq!(run(&["simulate", "--config", dir.path().join("none.json").to_str().unwrap()]).code, 2);
    let mut cfg = dissipative(0.1, 1e-3);
    cfg["initial_state"] = json!([1.0, 2.0]);
    let p = write_config(dir.path(), "short.json", &cfg);
    assert_eq!(run(&["simulate", "--config", p.to_str().unwrap()]).code, 2);
    let mut cfg = dissipative(0.1, 1e-3);
    cfg["system"]["h0"] = json!("q1 +");
    cfg["system"]["catalog"] = Value::Null;
    cfg["system"]["chart"] = json!("darboux");
    cfg["system"]["n"] = json!(2);
    let p = write_config(dir.path(), "parse.json", &cfg);
    assert_eq!(run(&["simulate", "--config", p.to_str().unwrap()]).code, 2);
}

#[test]
fn deterministic_inline_system_has_lambda_column() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "system": { "chart": "darboux", "n": 1, "h0": "p1^2/2 + c*z", "constants": { "c": 0.5 } },
        "t_end": 1.0, "dt": 0.01,
        "initial_state": [0.0, 1.0, 0.0]
    });
    let p = write_config(dir.path(), "c.json", &cfg);
    let r = run(&["simulate", "--config", p.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let last = r.stdout.lines().last().unwrap();
    let lambda: f64 = last.rsplit(',').next().unwrap().parse().unwrap();
    assert!((lambda - (-0.5f64).exp()).abs() < 1e-12);
}

#[test]
fn verify_contact_dissipative() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("defect.csv");
    let mut cfg = dissipative(1.0, 1e-3);
    cfg["outputs"] = json!({ "defect_csv": csv.to_str().unwrap() });
    let p2 = write_config(dir.path(), "c2.json", &cfg);
    let rep = json_of(&run(&["verify-contact", "--config", p2.to_str().unwrap()]));
    assert_eq!(rep["pass"], true);
    assert!(rep["lambda_max_deviation"].as_f64().unwrap() <= 1e-12);
    assert!(rep["defect_order"].as_f64().unwrap() >= 0.9);
    assert_eq!(rep["strict_contactomorphism"], false);
    let header = std::fs::read_to_string(&csv).unwrap();
    assert!(header.starts_with("t,r_1,r_2,r_3,r_4,r_5,sup\n"));

    // the embedded config reloads to the same report
    let embedded = write_config(dir.path(), "embedded.json", &rep["config"]);
    let again = json_of(&run(&["verify-contact", "--config", embedded.to_str().unwrap()]));
    assert_eq!(again, rep);
}

#[test]
fn verify_contact_sasaki_einstein_is_strict() {
    let dir = TempDir::new().unwrap();
    let p = write_config(dir.path(), "c.json", &sasaki_einstein(0.02, 1e-3));
    let rep = json_of(&run(&["verify-contact", "--config", p.to_str().unwrap(), "--report-only"]));
    assert_eq!(rep["lambda_final"], 1.0);
    assert_eq!(rep["lambda_max_deviation"], 0.0);
    assert_eq!(rep["strict_contactomorphism"], true);
}

#[test]
fn verify_contact_inline_linear_hamiltonian() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "system": { "chart": "darboux", "n": 1, "h0": "z" },
        "t_end": 1.0, "dt": 1e-4,
        "initial_state": [0.3, 0.1, 2.0]
    });
    let p = write_config(dir.path(), "c.json", &cfg);
    let rep = json_of(&run(&["verify-contact", "--config", p.to_str().unwrap()]));
    assert!((rep["lambda_final"].as_f64().unwrap() - (-1.0f64).exp()).abs() <= 1e-8);
    assert!(rep["lambda_closed_form"].is_string());
    assert_eq!(rep["pass"], true);
}

#[test]
fn check_integrability_outcomes() {
    let dir = TempDir::new().unwrap();
    let p = write_config(dir.path(), "c.json", &sasaki_einstein(0.01, 1e-3));
    let c = p.to_str().unwrap();
    let ok = json_of(&run(&[
        "check-integrability", "--config", c,
        "--integral", "1", "--integral", "(1/3)*cos(theta1)", "--integral", "(1/3)*cos(theta2)",
    ]));
    assert_eq!(ok["report"]["pass"], true);
    assert!(ok["report"]["max_involution"].as_f64().unwrap() <= 1e-12);

    let args = [
        "check-integrability", "--config", c,
        "--integral", "1", "--integral", "(1/3)*cos(theta1)", "--integral", "phi1",
    ];
    let fail = run(&args);
    assert_eq!(fail.code, 1);
    let rep: Value = serde_json::from_str(&fail.stdout).unwrap();
    assert_eq!(rep["report"]["involution_pass"], false);
    let mut relaxed = args.to_vec();
    relaxed.push("--report-only");
    assert_eq!(run(&relaxed).code, 0);

    let wrong = run(&["check-integrability", "--config", c, "--integral", "1", "--integral", "phi1"]);
    assert_eq!(wrong.code, 2, "{}", wrong.stderr);
}

#[test]
fn bracket_command() {
    let dir = TempDir::new().unwrap();
    let mut cfg = dissipative(0.1, 1e-3);
    cfg["initial_state"] = json!([0.5, -1.0, 2.0, 0.25, 3.0]);
    let p = write_config(dir.path(), "c.json", &cfg);
    let rep = json_of(&run(&["bracket", "--config", p.to_str().unwrap(), "--f", "q1", "--g", "p1"]));
    assert_eq!(rep["value"], 1.0);
    let rep = json_of(&run(&[
        "bracket", "--config", p.to_str().unwrap(), "--f", "q1*z", "--g", "1", "--h", "p2",
    ]));
    assert!((rep["value"].as_f64().unwrap() + 0.5).abs() < 1e-15);
    assert!(rep["leibniz"].is_object());
    assert_eq!(run(&["bracket", "--config", p.to_str().unwrap(), "--f", "w", "--g", "1"]).code, 2);
}

#[test]
fn monte_carlo_constant_and_worker_independence() {
    let dir = TempDir::new().unwrap();
    let p = write_config(dir.path(), "c.json", &dissipative(0.1, 1e-3));
    let c = p.to_str().unwrap();
    let one = json_of(&run(&["monte-carlo", "--config", c, "--observable", "1", "--paths", "20"]));
    assert_eq!(one["stats"]["mean"], 1.0);
    assert_eq!(one["stats"]["variance"], 0.0);

    let a = run(&["monte-carlo", "--config", c, "--observable", "z", "--paths", "40", "--workers", "1"]);
    let b = run(&["monte-carlo", "--config", c, "--observable", "z", "--paths", "40", "--workers", "3"]);
    assert_eq!(a.code, 0, "{}", a.stderr);
    assert_eq!(a.stdout, b.stdout);
    assert!(json_of(&a)["stats"]["variance"].as_f64().unwrap() > 0.0);
}

#[test]
fn convergence_command_reports_levels() {
    let dir = TempDir::new().unwrap();
    let p = write_config(dir.path(), "c.json", &dissipative(0.2, 1e-3));
    let rep = json_of(&run(&[
        "convergence", "--config", p.to_str().unwrap(), "--levels", "3", "--measure", "contact-defect",
    ]));
    assert_eq!(rep["report"]["dts"].as_array().unwrap().len(), 3);
    assert_eq!(rep["measure"], "contact-defect");
    assert_eq!(run(&["convergence", "--config", p.to_str().unwrap(), "--levels", "2"]).code, 2);
}

#[test]
fn emit_config_round_trips() {
    let dir = TempDir::new().unwrap();
    let p = write_config(dir.path(), "c.json", &dissipative(0.1, 1e-3));
    let emitted = dir.path().join("eff.json");
    let first = run(&[
        "simulate", "--config", p.to_str().unwrap(), "--seed", "7", "--dt", "0.002", "--scheme", "midpoint",
        "--emit-config", emitted.to_str().unwrap(),
    ]);
    assert_eq!(first.code, 0, "{}", first.stderr);
    let eff: Value = serde_json::from_str(&std::fs::read_to_string(&emitted).unwrap()).unwrap();
    assert_eq!(eff["master_seed"], 7);
    assert_eq!(eff["scheme"], "midpoint");
    let second = run(&["simulate", "--config", emitted.to_str().unwrap()]);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn list_systems_names_the_catalog() {
    let v = json_of(&run(&["list-systems"]));
    let ids: Vec<_> = v.as_array().unwrap().iter().map(|e| e["id"].as_str().unwrap().to_string()).collect();
    assert_eq!(ids, ["dissipative-2d", "sasaki-einstein-t11"]);
}
