use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_toda-lab"))
}

fn run(sub: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .arg(sub)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

const FLAT_SOLVE: &str = r#"{
  "r": 3,
  "weight": {"kind": "differential", "q": {"rank": 3, "leading": [1, 0], "zeros": []}},
  "grid": {"domain": {"shape": "disc", "radius": 0.9}, "h": 0.0625},
  "boundary": {"kind": "flat-like"}
}"#;

const BASELINE_SOLVE: &str = r#"{
  "r": 3,
  "weight": {"kind": "differential", "q": {"rank": 3, "leading": [1, 0], "zeros": [[0, 0, 1]]}},
  "grid": {"domain": {"shape": "disc", "radius": 0.9}, "h": 0.03125},
  "boundary": {"kind": "flat-like"}
}"#;

/// Residual of the baseline solve when it was frozen.
const BASELINE_RESIDUAL: f64 = 5.027644967015021e-13;

#[test]
fn spectrum_scan_reports_limits_and_divergence() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write(
        t.path(),
        "spectrum.json",
        r#"{"betas": [1, -1], "r_values": [100, 200, 400, 800, 1600]}"#,
    );
    let out = t.path().join("out");
    let o = run("spectrum", &cfg, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("spectrum.csv")).unwrap();
    assert!(csv.starts_with("r,beta,entropy,shifted,limit,gap,sandwich,error\n"));
    assert_eq!(csv.lines().count(), 11);
    let report = json(&out.join("spectrum.json"));
    let betas = report["betas"].as_array().unwrap();
    assert_eq!(betas[0]["verdict"], "converges");
    assert_eq!(betas[0]["monotone"], true);
    assert!(betas[0]["final_gap"].as_f64().unwrap() < 0.01);
    assert_eq!(betas[1]["verdict"], "diverges");
    assert_eq!(betas[1]["limit"], Value::Null);
    assert_eq!(betas[1]["sandwich_holds"], true);
}

#[test]
fn spectrum_usage_and_row_errors() {
    let t = tempfile::tempdir().unwrap();
    let empty = write(t.path(), "empty.json", r#"{"betas": [1], "r_values": []}"#);
    let o = run("spectrum", &empty, &t.path().join("a"), &[]);
    assert_eq!(o.status.code(), Some(2));

    let zero = write(t.path(), "zero.json", r#"{"betas": [0, 1], "r_values": [10, 20]}"#);
    let out = t.path().join("b");
    let o = run("spectrum", &zero, &out, &[]);
    assert_eq!(o.status.code(), Some(1));
    let csv = fs::read_to_string(out.join("spectrum.csv")).unwrap();
    let zero_rows: Vec<&str> = csv.lines().filter(|l| l.split(',').nth(1) == Some("0")).collect();
    assert_eq!(zero_rows.len(), 2);
    assert!(zero_rows.iter().all(|l| l.contains("nonzero")));
    let report = json(&out.join("spectrum.json"));
    assert_eq!(report["betas"][1]["passed"], true);
}

#[test]
fn solve_writes_directory_and_flat_verify_is_extremal() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write(t.path(), "solve.json", FLAT_SOLVE);
    let sol = t.path().join("sol");
    let o = run("solve", &cfg, &sol, &[]);
    assert!(o.status.success());
    for f in ["metadata.json", "u_1.csv", "u_2.csv"] {
        assert!(sol.join(f).is_file(), "{f}");
    }
    let meta = json(&sol.join("metadata.json"));
    assert!(meta["meta"]["iterations"].as_u64().unwrap() <= 3);

    let vcfg = write(t.path(), "verify.json", r#"{"solution": "sol", "betas": [-0.5, 1]}"#);
    let out = t.path().join("verify");
    let o = run("verify", &vcfg, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let report = json(&out.join("report.json"));
    assert_eq!(report["pointwise"]["extremal"], "flat");
    assert_eq!(report["sup_chain"]["extremal"], "flat");
    assert_eq!(report["entropy"][0]["extremal"], "flat");
    assert!(out.join("sigma_1.svg").is_file());
    assert!(out.join("entropy_beta_m0.5.svg").is_file());
}

#[test]
fn bad_boundary_kind_is_usage_error() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write(
        t.path(),
        "solve.json",
        &FLAT_SOLVE.replace("flat-like", "sideways"),
    );
    let o = run("solve", &cfg, &t.path().join("sol"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!t.path().join("sol").exists());
}

#[test]
fn baseline_solve_reproduces_frozen_residual() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write(t.path(), "solve.json", BASELINE_SOLVE);
    let sol = t.path().join("sol");
    assert!(run("solve", &cfg, &sol, &[]).status.success());
    let meta = json(&sol.join("metadata.json"));
    let res = meta["meta"]["residual"].as_f64().unwrap();
    assert!(res / BASELINE_RESIDUAL < 10.0 && BASELINE_RESIDUAL / res < 10.0, "{res}");

    // β = 1 passes every check; β = -0.5 fails the lower entropy bound near
    // the zero, where vol(H_0) → 0 drives p_0 → 1
    let ok = write(
        t.path(),
        "ok.json",
        r#"{"solution": "sol", "betas": [1], "heatmaps": false, "zero_patch_tolerance": 0.05}"#,
    );
    let o = run("verify", &ok, &t.path().join("v1"), &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let neg = write(t.path(), "neg.json", r#"{"solution": "sol", "betas": [-0.5], "heatmaps": false}"#);
    let o = run("verify", &neg, &t.path().join("v2"), &[]);
    assert_eq!(o.status.code(), Some(1));
    let report = json(&t.path().join("v2/report.json"));
    assert_eq!(report["entropy"][0]["lower_holds"], false);
    assert_eq!(report["entropy"][0]["upper_holds"], true);
}

#[test]
fn verify_rejects_missing_and_corrupted_solutions() {
    let t = tempfile::tempdir().unwrap();
    let vcfg = write(t.path(), "verify.json", r#"{"solution": "sol"}"#);
    let o = run("verify", &vcfg, &t.path().join("v"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no solution directory"));

    let cfg = write(t.path(), "solve.json", FLAT_SOLVE);
    assert!(run("solve", &cfg, &t.path().join("sol"), &[]).status.success());
    let field = t.path().join("sol/u_1.csv");
    let text = fs::read_to_string(&field).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    lines[3].push('7');
    fs::write(&field, lines.join("\n") + "\n").unwrap();
    let o = run("verify", &vcfg, &t.path().join("v"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("integrity"));
}

#[test]
fn entropy_writes_fields_and_flags_beta_zero() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write(t.path(), "solve.json", FLAT_SOLVE);
    assert!(run("solve", &cfg, &t.path().join("sol"), &[]).status.success());
    let ecfg = write(t.path(), "entropy.json", r#"{"solution": "sol", "betas": [2, 0]}"#);
    let out = t.path().join("e");
    let o = run("entropy", &ecfg, &out, &[]);
    assert_eq!(o.status.code(), Some(1));
    let csv = fs::read_to_string(out.join("entropy_beta_2.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "ix,iy,x,y,kind,entropy,p_0,p_1,p_2");
    for line in lines {
        let s: f64 = line.split(',').nth(5).unwrap().parse().unwrap();
        assert!((s - 3f64.ln()).abs() < 1e-12);
    }
    let report = json(&out.join("entropy.json"));
    assert_eq!(report["results"][0]["passed"], true);
    assert!(report["results"][1]["error"].as_str().unwrap().contains("nonzero"));
}

#[test]
fn lemma_pq_is_deterministic_and_violation_free() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write(t.path(), "pq.json", r#"{"count": 10000, "seed": 42}"#);
    let (a, b) = (t.path().join("a"), t.path().join("b"));
    assert!(run("lemma-pq", &cfg, &a, &[]).status.success());
    assert!(run("lemma-pq", &cfg, &b, &[]).status.success());
    let bytes = fs::read(a.join("lemma_pq.json")).unwrap();
    assert_eq!(bytes, fs::read(b.join("lemma_pq.json")).unwrap());
    let report: Value = serde_json::from_slice(&bytes).unwrap();
    let ranks = report["ranks"].as_array().unwrap();
    assert_eq!(ranks.len(), 6);
    assert!(ranks.iter().all(|k| k["violations"] == 0 && k["pairs"] == 10000));

    let c = t.path().join("c");
    assert!(run("lemma-pq", &cfg, &c, &["--seed", "7"]).status.success());
    let other = json(&c.join("lemma_pq.json"));
    assert_eq!(other["seed"], 7);
    assert_ne!(other["ranks"][0]["min_margin"], report["ranks"][0]["min_margin"]);
}

#[test]
fn lemma_pq_zero_count_is_vacuous_pass() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write(t.path(), "pq.json", r#"{"count": 0}"#);
    let out = t.path().join("o");
    let o = run("lemma-pq", &cfg, &out, &[]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("vacuous"));
    let report = json(&out.join("lemma_pq.json"));
    assert_eq!(report["warnings"].as_array().unwrap().len(), 1);
    assert_eq!(report["passed"], true);
}
