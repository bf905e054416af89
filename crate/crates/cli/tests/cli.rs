use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kh(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kh"))
        .args(args)
        .env("KH_OUT_DIR", dir)
        .output()
        .expect("running kh")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = kh(dir, args);
    assert!(out.status.success(), "kh {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn survey_output_ignores_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["survey", "--n", "24", "--rng-seed", "7", "--threads", "1", "--name", "one"]);
    ok(d, &["survey", "--n", "24", "--rng-seed", "7", "--threads", "8", "--name", "eight"]);
    let a = fs::read(d.join("one.csv")).unwrap();
    assert_eq!(a, fs::read(d.join("eight.csv")).unwrap());
    assert_eq!(fs::read(d.join("one.json")).unwrap(), fs::read(d.join("eight.json")).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 25);
    assert!(text.starts_with("index,p_s,p_theta,branch,J,lambda,phi,classification,status,"));

    let report = json(&d.join("one.json"));
    let f = &report["families"];
    let total = ["future_collision", "past_collision", "quasi_periodic"].iter().map(|k| f[k].as_u64().unwrap()).sum::<u64>();
    assert_eq!(total + report["failures"].as_u64().unwrap(), 24);
    assert_eq!(report["table_violations"], 0);
}

#[test]
fn empty_survey_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = kh(dir.path(), &["survey", "--n", "0"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("n ≥ 1"));
    assert!(fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn quasi_periodic_seed() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["integrate", "--p-s", "0", "--p-theta", "0.5"]);
    let r = json(&dir.path().join("orbit.json"));
    assert_eq!(r["classification"], "QuasiPeriodic");
    assert!((r["similarity"]["lambda"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn collision_time_is_predicted() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["integrate", "--p-s", "-0.15", "--p-theta", "0.5", "--csv"]);
    let r = json(&dir.path().join("orbit.json"));
    assert_eq!(r["classification"], "FutureCollision");
    assert!(r["similarity"]["lambda"].as_f64().unwrap() < 1.0);
    let c = &r["collision"];
    assert!(c["relative_error"].as_f64().unwrap() < 1e-4);
    assert!(c["predicted"].as_f64().unwrap() > c["t2"].as_f64().unwrap());

    let series = fs::read_to_string(dir.path().join("orbit.csv")).unwrap();
    assert!(series.starts_with("t,x,y,z,p_x,p_y,p_z,H,J,p_theta,s,theta,u\n"));
    let csv = dir.path().join("orbit.csv");
    let report = dir.path().join("orbit.json");
    ok(dir.path(), &["plot", csv.to_str().unwrap(), "--report", report.to_str().unwrap()]);
    assert!(dir.path().join("orbit.svg").exists());
}

#[test]
fn stationary_state_reports_axis_flag() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["integrate", "--state", "0,0,1,0,0,0", "--span", "10", "--name", "axis"]);
    let r = json(&dir.path().join("axis.json"));
    assert_eq!(r["status"], "insufficient-zeros");
    assert_eq!(r["axis_proximity"], true);
    assert!(r["similarity"].is_null() && r["domains_verified"].as_array().unwrap().is_empty());
}

#[test]
fn planar_line_plot_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["integrate", "--state", "1,0,0,-0.28209479177387814,0,0", "--name", "line", "--csv"]);
    assert_eq!(json(&d.join("line.json"))["classification"], "PlanarLine");
    ok(d, &["plot", d.join("line.csv").to_str().unwrap(), "--report", d.join("line.json").to_str().unwrap()]);
    let svg = fs::read_to_string(d.join("line.svg")).unwrap();
    assert!(svg.contains(r#"id="projection""#) && svg.contains(r#"id="height""#));
    assert!(!svg.contains("stroke-dasharray"), "a planar orbit has no zeros to mark");
}

#[test]
fn verify_and_seed_commands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["verify", "--p-s", "0.1", "--p-theta", "0.6", "--max-residual", "1e-5"]);
    let r = json(&d.join("verify.json"));
    assert!(r["similarity"]["domain_residual"].as_f64().unwrap() < 1e-5);
    assert!(r["domains_verified"].as_array().unwrap().len() >= 2);

    let out = ok(d, &["seed", "--n", "3", "--rng-seed", "11"]);
    let seeds: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(seeds.as_array().unwrap().len(), 3);
    assert_eq!(seeds, serde_json::from_slice::<Value>(&ok(d, &["seed", "--n", "3", "--rng-seed", "11"]).stdout).unwrap());
}

#[test]
fn out_dir_flag_and_env() {
    let dir = tempfile::tempdir().unwrap();
    let nested = dir.path().join("a/b");
    ok(dir.path(), &["seed", "--name", "one", "--out-dir", nested.to_str().unwrap()]);
    assert!(nested.join("one.json").exists());
    ok(dir.path(), &["seed", "--name", "two"]);
    assert!(dir.path().join("two.json").exists());
}
