use std::path::Path;
use std::process::{Command, Output};

use kpgeo::fields::snapshot::save_real;
use kpgeo::fields::{GridField, TorusGrid};
use serde_json::{json, Value};

fn kpgeo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kpgeo")).args(args).output().expect("spawn kpgeo")
}

fn write_config(dir: &Path, cfg: Value) -> String {
    let p = dir.join("config.json");
    std::fs::write(&p, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    p.to_string_lossy().into_owned()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("out/report.json")).unwrap()).unwrap()
}

#[test]
fn schedule_mode_prints_indices() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), json!({
        "schema": "kpgeo-config v1", "mode": "schedule", "k": 5.0, "j": 0.1, "output_dir": "out"
    }));
    let out = kpgeo(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let printed: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(printed["indices"]["zeta"], 487);
    let r = report(dir.path());
    assert_eq!(r["schema"], "RPT v1");
    assert_eq!(r["constants"]["zeta"], 487.0);
    assert!(dir.path().join("out/schedule.json").exists());
}

#[test]
fn zero_endpoints_run_trivially() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), json!({
        "schema": "kpgeo-config v1", "mode": "solve-geodesic", "theta": 5.0,
        "torus": [8, 1], "resolutions": [6], "boundary_spacing": 0.04, "output_dir": "out"
    }));
    let out = kpgeo(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path());
    for key in ["final_residual[w6]", "theta_variation[w6]", "geodesic_residual[w6]", "oracle_diff[w6]"] {
        assert_eq!(r["residuals"][key], 0.0, "{key}");
    }
    let trace = std::fs::read_to_string(dir.path().join("out/trace_w6.csv")).unwrap();
    assert_eq!(trace.lines().count(), 2);
    assert!(dir.path().join("out/schedule_w6.json").exists());
    assert!(dir.path().join("out/residual_vs_step.csv").exists());
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), json!({
        "schema": "kpgeo-config v1", "mode": "solve-geodesic", "theta": 5.0, "torus": [16, 1],
        "resolutions": [6], "boundary_spacing": 0.04, "output_dir": "out",
        "endpoints": {"phi1": {"profile": "cosine", "amplitude": 0.03}}
    }));
    assert_eq!(kpgeo(&["run", "--config", &cfg]).status.code(), Some(0));
    let first = std::fs::read(dir.path().join("out/report.json")).unwrap();
    assert_eq!(kpgeo(&["run", "--config", &cfg]).status.code(), Some(0));
    assert_eq!(first, std::fs::read(dir.path().join("out/report.json")).unwrap());
}

#[test]
fn shifted_background_with_equal_endpoints() {
    let dir = tempfile::tempdir().unwrap();
    let torus = TorusGrid::new(8, 1);
    let psi0 = GridField::torus_field(torus, torus.sample(|x, _| 0.1 * (x + 0.2).sin()));
    save_real(&psi0, &dir.path().join("psi0.gfld")).unwrap();
    let cfg = write_config(dir.path(), json!({
        "schema": "kpgeo-config v1", "mode": "shift-background", "theta": 5.0, "torus": [8, 1],
        "resolutions": [6], "boundary_spacing": 0.04, "output_dir": "out", "background": "psi0.gfld",
        "endpoints": {"phi0": {"snapshot": "psi0.gfld"}, "phi1": {"snapshot": "psi0.gfld"}}
    }));
    let out = kpgeo(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path());
    assert!(r["residuals"]["final_residual[w6]"].as_f64().unwrap() < 1e-9);
    let path = kpgeo::fields::snapshot::load_real(&dir.path().join("out/path_w6.gfld")).unwrap();
    for k in 0..path.planar_len() {
        for (a, b) in path.slice(k).iter().zip(&psi0.values) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}

#[test]
fn disc_solve_reports_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), json!({
        "schema": "kpgeo-config v1", "mode": "disc-solve", "torus": [16, 1], "resolutions": [8],
        "output_dir": "out", "endpoints": {"phi1": {"profile": "mixed", "amplitude": 0.03}}
    }));
    let out = kpgeo(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path());
    assert!(r["residuals"]["hcma[c8]"].as_f64().unwrap() < 1e-6);
}

#[test]
fn verify_only_smoothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), json!({"schema": "kpgeo-config v1", "mode": "verify-suite", "output_dir": "out"}));
    let out = kpgeo(&["verify", "--config", &cfg, "--only", "smoothing"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().count(), 1);
    assert!(stdout.contains("criterion  1 smoothing"));
    assert_eq!(report(dir.path())["acceptance"].as_array().unwrap().len(), 1);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), json!({"schema": "kpgeo-config v0", "mode": "schedule"}));
    assert_eq!(kpgeo(&["run", "--config", &cfg]).status.code(), Some(2));
    let cfg = write_config(dir.path(), json!({"schema": "kpgeo-config v1", "mode": "schedule", "j": 0.4}));
    assert_eq!(kpgeo(&["run", "--config", &cfg]).status.code(), Some(2));
    let cfg = write_config(dir.path(), json!({"schema": "kpgeo-config v1", "mode": "verify-suite", "output_dir": "out"}));
    assert_eq!(kpgeo(&["verify", "--config", &cfg, "--only", "nothing"]).status.code(), Some(2));
    assert_eq!(kpgeo(&["run", "--config", "/nonexistent/config.json"]).status.code(), Some(2));
}

#[test]
fn corrupted_snapshot_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.gfld"), b"GFLD v1 torus 1 8 1\n\x00\x01").unwrap();
    let cfg = write_config(dir.path(), json!({
        "schema": "kpgeo-config v1", "mode": "solve-geodesic", "torus": [8, 1], "resolutions": [6],
        "output_dir": "out", "endpoints": {"phi1": {"snapshot": "bad.gfld"}}
    }));
    let out = kpgeo(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.gfld"));
}

#[test]
fn leaving_the_neighbourhood_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), json!({
        "schema": "kpgeo-config v1", "mode": "solve-geodesic", "theta": 5.0, "torus": [16, 1],
        "resolutions": [6], "boundary_spacing": 0.04, "output_dir": "out", "epsilon_amplitude": 1e-6,
        "endpoints": {"phi1": {"profile": "cosine", "amplitude": 0.05}}
    }));
    let out = kpgeo(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}
