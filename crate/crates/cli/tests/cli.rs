//! End-to-end CLI behavior: document shapes, flag validation, exit codes.

use std::process::{Command, Output};
use std::time::Instant;

fn sphq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sphq"))
        .args(args)
        .output()
        .expect("spawn sphq")
}

fn stdout_json(args: &[&str]) -> serde_json::Value {
    let out = sphq(args);
    assert!(
        out.status.success(),
        "sphq {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is one json document")
}

fn error_field(v: &serde_json::Value) -> f64 {
    v["payload"]["error"].as_f64().expect("payload.error")
}

#[test]
fn error_command_reports_exact_value() {
    let v = stdout_json(&[
        "error", "--model", "equator", "--points", "120", "--codes", "6",
    ]);
    let got = error_field(&v);
    let want = 133.0 * std::f64::consts::PI.powi(2) / 14400.0;
    assert!((got - want).abs() < 1e-15);
    assert_eq!(v["schema_version"], "1");
    assert_eq!(v["metadata"]["kind"], "error");
    assert_eq!(v["metadata"]["model"], "equator");
}

#[test]
fn error_and_quantize_agree() {
    let args = ["--model", "one-circle", "--points", "30", "--codes", "7", "--phi", "0.6"];
    let e = stdout_json(&[&["error"], &args[..]].concat());
    let q = stdout_json(&[&["quantize"], &args[..]].concat());
    assert_eq!(error_field(&e), error_field(&q));
    assert!(q["payload"]["codebook"]["entries"].as_array().unwrap().len() == 7);
}

#[test]
fn two_circles_metadata_echoes_per_circle_count() {
    let v = stdout_json(&[
        "error", "--model", "two-circles", "--points", "240", "--codes", "8", "--phi", "0.6",
    ]);
    assert_eq!(v["metadata"]["points"], 240);
    assert_eq!(v["metadata"]["per_circle_points"], 120);
}

#[test]
fn oracle_dp_matches_error_command() {
    let dp = stdout_json(&["oracle", "--method", "dp", "--points", "12", "--codes", "5"]);
    let eq = stdout_json(&["error", "--model", "equator", "--points", "12", "--codes", "5"]);
    let (a, b) = (error_field(&dp), error_field(&eq));
    assert!((a - b).abs() <= 1e-9 * b);
    assert_eq!(dp["metadata"]["method"], "dp");
}

#[test]
fn oracle_lloyd_is_seeded_and_reproducible() {
    let args = [
        "oracle", "--method", "lloyd", "--points", "12", "--codes", "3", "--seed", "9",
        "--restarts", "5",
    ];
    let a = sphq(&args);
    let b = sphq(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["metadata"]["rng"], "chacha8");
    assert_eq!(v["metadata"]["seed"], 9);
}

#[test]
fn curve_defaults_to_csv() {
    let out = sphq(&["curve", "--phis", "0,0.5,1.0", "--samples", "9"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("phi,dtheta,sigma\n"));
    assert_eq!(text.lines().count(), 1 + 3 * 9);
}

#[test]
fn table_reproduces_latitude_comparison() {
    let out = sphq(&["table", "--points", "120", "--codes", "6", "--phis", "0,0.6,1.0"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("phi0,cos2phi0,V_exact,V_asymptotic,reduction_pct\n"));
    let row: Vec<&str> = text.lines().nth(2).unwrap().split(',').collect();
    let reduction: f64 = row[4].parse().unwrap();
    assert!((reduction - 31.9).abs() < 0.05);
}

#[test]
fn flag_errors_exit_2_with_usage_on_stderr() {
    // Unknown flag: clap reports usage on stderr.
    let out = sphq(&["error", "--nonsense"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert!(out.stdout.is_empty());

    // Missing latitude for a circle model.
    let out = sphq(&["error", "--model", "one-circle", "--points", "12", "--codes", "3"]);
    assert_eq!(out.status.code(), Some(2));

    // Odd total for the two-circle model.
    let out = sphq(&[
        "error", "--model", "two-circles", "--points", "241", "--codes", "8", "--phi", "0.6",
    ]);
    assert_eq!(out.status.code(), Some(2));

    // Odd codebook size for the two-circle model.
    let out = sphq(&[
        "error", "--model", "two-circles", "--points", "240", "--codes", "7", "--phi", "0.6",
    ]);
    assert_eq!(out.status.code(), Some(2));

    // Latitude out of range, with the offending token named.
    let out = sphq(&["curve", "--phis", "0,1.6"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("1.6") && err.contains("position 2"));

    // Empty latitude list.
    let out = sphq(&["curve", "--phis", ""]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn diagnostics_stay_off_stdout() {
    let out = sphq(&[
        "quantize", "--model", "two-circles", "--points", "48", "--codes", "6", "--phi", "0.6",
    ]);
    assert!(out.status.success());
    // The whole of stdout is one parseable document.
    let _: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
}

#[test]
fn verify_small_budget_passes_within_a_minute() {
    let t = Instant::now();
    let out = sphq(&["verify", "--budget", "small"]);
    let elapsed = t.elapsed();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["metadata"]["kind"], "verify");
    assert_eq!(v["payload"]["failed"], 0);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("PASS"));
    assert!(
        elapsed.as_secs() < 60,
        "verify --budget small took {elapsed:?}"
    );
}

#[test]
fn verify_rejects_unknown_budget() {
    let out = sphq(&["verify", "--budget", "medium"]);
    assert_eq!(out.status.code(), Some(2));
}
