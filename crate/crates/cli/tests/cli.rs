use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn casimir(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_casimir")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn drude() -> Value {
    json!({"model": "drude", "omega_p": 1.37e16, "gamma": 5.3e13})
}

fn experiment() -> Value {
    let z: Vec<f64> = (0..12).map(|i| 1e-6 * 10f64.powf(i as f64 / 11.0)).collect();
    let v: Vec<f64> = (0..11).map(|i| -0.5 + 0.1 * i as f64).collect();
    json!({
        "R": 100e-6, "T": 300.0,
        "plate_model": drude(), "sphere_model": drude(),
        "contact": {"a": 2e-3, "b": -5e-3},
        "V1": 30e-3, "V_rms": 10e-3, "d0": 150e-9,
        "z_grid": z, "v_sweep": v,
        "sigma_F": 0.0, "sigma_F_relative": 0.02,
        "seed": 0
    })
}

#[test]
fn help_exits_zero() {
    let out = casimir(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in ["force", "electrostatic", "screening", "patch", "simulate", "analyze", "fit-residual"] {
        assert!(text.contains(sub), "{sub}");
    }
    assert_eq!(casimir(&["simulate", "--help"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(casimir(&[]).status.code(), Some(1));
    assert_eq!(casimir(&["bogus"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "exp.json", &experiment().to_string());
    // --seed is mandatory for simulate.
    assert_eq!(casimir(&["simulate", s(&cfg)]).status.code(), Some(1));
}

#[test]
fn malformed_json_reports_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", "{\n  \"plate_a\": {\"model\": \"perfect_conductor\"},\n  \"d\": 1e-6,,\n}");
    let out = dir.path().join("out.csv");
    let res = casimir(&["force", s(&cfg), "--out", s(&out)]);
    assert_eq!(res.status.code(), Some(1));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("bad.json:3:"), "{err}");
    assert!(err.contains("line 3 column"), "{err}");
    assert!(!out.exists());
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = experiment();
    cfg["V_rsm"] = json!(0.01);
    let p = write(dir.path(), "exp.json", &cfg.to_string());
    let res = casimir(&["simulate", s(&p), "--seed", "1"]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("V_rsm"));
}

#[test]
fn invalid_physics_exits_one_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = experiment();
    cfg["d0"] = json!(-5e-6);
    let p = write(dir.path(), "exp.json", &cfg.to_string());
    let out = dir.path().join("data.csv");
    assert_eq!(casimir(&["simulate", s(&p), "--seed", "1", "--out", s(&out)]).status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn missing_input_exits_three() {
    let res = casimir(&["force", "/nonexistent/problem.json"]);
    assert_eq!(res.status.code(), Some(3));
    let dir = tempfile::tempdir().unwrap();
    let model = write(
        dir.path(),
        "model.json",
        &json!({"R": 1e-4, "T": 300.0, "plate_model": drude(), "sphere_model": drude()}).to_string(),
    );
    let res = casimir(&["analyze", "/nonexistent/data.csv", "--model", s(&model)]);
    assert_eq!(res.status.code(), Some(3));
}

#[test]
fn non_convergence_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    // At 1 nK the auto Matsubara sum needs far more terms than its budget.
    let cold = write(
        dir.path(),
        "cold.json",
        &json!({"plate_a": drude(), "plate_b": drude(), "d": 1e-6, "T": 1e-9}).to_string(),
    );
    let res = casimir(&["force", s(&cold)]);
    assert_eq!(res.status.code(), Some(2), "{}", String::from_utf8_lossy(&res.stderr));
}

#[test]
fn force_ideal_mirrors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "p.json",
        &json!({"plate_a": {"model": "perfect_conductor"}, "plate_b": {"model": "perfect_conductor"}, "d": 1e-6, "T": 0.0})
            .to_string(),
    );
    let res = casimir(&["force", s(&cfg), "--format", "json", "--radius", "1e-4"]);
    assert_eq!(res.status.code(), Some(0));
    let rows: Value = serde_json::from_slice(&res.stdout).unwrap();
    let p = rows[0]["pressure_Pa"].as_f64().unwrap();
    assert!((p / 1.300126e-3 - 1.0).abs() < 1e-5, "{p}");
    let csv = casimir(&["force", s(&cfg), "--d-min", "1e-6", "--d-max", "1e-5", "--points", "5"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("d_m,energy_J_m2,pressure_Pa,matsubara_terms\n"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn electrostatic_screening_patch_tables() {
    let dir = tempfile::tempdir().unwrap();
    let geo = write(dir.path(), "g.json", r#"{"geometry": "sphere_plane", "radius": 1e-4}"#);
    let res = casimir(&["electrostatic", s(&geo), "--d-min", "1e-7", "--d-max", "1e-6", "--points", "3"]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let text = String::from_utf8(res.stdout).unwrap();
    assert!(text.starts_with("d_m,C_F,F_N,alpha_N_V2\n"));

    let ge = write(dir.path(), "ge.json", r#"{"eps_static": 16.0, "carrier_density": 4.7e19, "T": 300.0}"#);
    let res = casimir(&["screening", s(&ge), "--d-min", "2e-6", "--d-max", "5e-5", "--format", "json"]);
    assert_eq!(res.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&res.stdout).unwrap();
    let lambda = v["lambda"].as_f64().unwrap();
    assert!((0.55e-6..=0.75e-6).contains(&lambda));

    let spec = write(dir.path(), "s.json", r#"{"spectrum": "top_hat_correlation", "V0": 0.01, "lambda_patch": 1e-5}"#);
    let res = casimir(&["patch", s(&spec), "--radius", "1e-4", "--d-min", "5e-8", "--d-max", "2e-4", "--points", "4"]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let text = String::from_utf8(res.stdout).unwrap();
    let first: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    // F·d/(πε0R V0²) → 1 at short distance.
    assert!((first[2] / 1e-4 - 1.0).abs() < 0.01, "{}", first[2]);
}

#[test]
fn simulate_then_analyze_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "exp.json", &experiment().to_string());
    let data = dir.path().join("data.csv");
    let res = casimir(&["simulate", s(&cfg), "--seed", "42", "--out", s(&data)]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));

    // Identical invocation, identical bytes.
    let again = dir.path().join("again.csv");
    casimir(&["simulate", s(&cfg), "--seed", "42", "--out", s(&again)]);
    assert_eq!(std::fs::read(&data).unwrap(), std::fs::read(&again).unwrap());

    let model = write(
        dir.path(),
        "model.json",
        &json!({"R": 100e-6, "T": 300.0, "plate_model": drude(), "sphere_model": drude()}).to_string(),
    );
    let out = dir.path().join("result.json");
    let res = casimir(&["analyze", s(&data), "--model", s(&model), "--out", s(&out)]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let r: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    let get = |p: &str| r.pointer(p).and_then(Value::as_f64).unwrap();
    assert!((get("/d0_est") - 150e-9).abs() < 2e-9);
    assert!((get("/residual_fit/V1") / 30e-3 - 1.0).abs() < 0.05);
    assert!((get("/residual_fit/V_rms") / 10e-3 - 1.0).abs() < 0.05);
    assert!((get("/log_fit/a") / 2e-3 - 1.0).abs() < 0.05);
    assert!((get("/log_fit/b") / -5e-3 - 1.0).abs() < 0.05);
    assert_eq!(r["goodness"].as_array().unwrap().len(), 5);
}

#[test]
fn fit_residual_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let (r, v1, vrms, a, b) = (1e-4f64, 30e-3f64, 10e-3f64, 2e-3f64, -5e-3f64);
    let eps0 = 8.8541878128e-12;
    let mut force = String::from("d_m,F_N\n");
    let mut vm = String::from("d_m,V_a_V\n");
    for i in 0..20 {
        let d = 1e-6 * 10f64.powf(i as f64 / 19.0);
        let v_m = a * d.ln() + b;
        let f = std::f64::consts::PI * eps0 * r * ((v_m + v1).powi(2) + vrms * vrms) / d;
        force += &format!("{d:.16e},{f:.16e}\n");
        vm += &format!("{d:.16e},{v_m:.16e}\n");
    }
    let fp = write(dir.path(), "force.csv", &force);
    let vp = write(dir.path(), "vm.csv", &vm);
    let res = casimir(&["fit-residual", s(&fp), "--vm", s(&vp), "--radius", "1e-4"]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let out: Value = serde_json::from_slice(&res.stdout).unwrap();
    assert!((out["V1"].as_f64().unwrap() / v1 - 1.0).abs() < 1e-6);
    assert!((out["V_rms"].as_f64().unwrap() / vrms - 1.0).abs() < 1e-6);
}
