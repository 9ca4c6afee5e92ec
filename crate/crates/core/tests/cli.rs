use serde_json::Value;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use vhj_lab::cli::{EXIT_FAIL, EXIT_PASS, EXIT_USAGE};
use vhj_lab::config::ExperimentConfig;

fn vhj(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vhj-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn derive(n: &str, p: &str, q: &str) -> Value {
    let o = vhj(&["derive", "-N", n, "-p", p, "-q", q]);
    assert_eq!(code(&o), EXIT_PASS, "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn close(v: &Value, x: f64) {
    let got = v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"));
    assert!((got - x).abs() <= 1e-12 * x.abs().max(1.0), "{got} vs {x}");
}

#[test]
fn derive_single_point() {
    let v = derive("1", "2", "0.5");
    assert_eq!(v["regime"], "SinglePointRange");
    let c = &v["constants"];
    close(&c["kappa"], 1.0 / 12.0);
    close(&c["omega"], 3.0);
    close(&c["sigma"], 2.0 / 3.0);
    close(&c["nu"], 1.0 / 6.0);
    close(&c["decay_threshold"], 1.0);
}

#[test]
fn derive_complete_extinction() {
    let v = derive("2", "1.8", "0.85");
    assert_eq!(v["regime"], "CompleteExtinctionRange");
}

#[test]
fn derive_no_finite_extinction() {
    let v = derive("2", "1.8", "0.95");
    assert_eq!(v["regime"], "NoFiniteExtinction");
    assert!(v["constants"].is_null());
    assert!(v["note"].is_string());
}

#[test]
fn derive_rejects_bad_exponent() {
    let o = vhj(&["derive", "-N", "2", "-p", "2.5", "-q", "0.5"]);
    assert_eq!(code(&o), EXIT_USAGE);
}

fn residual(dir: &Path, name: &str, body: &str) -> (i32, Value) {
    let cfg = dir.join(format!("{name}.json"));
    let out = dir.join(format!("{name}.report.json"));
    fs::write(&cfg, body).unwrap();
    let o = vhj(&["residual", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let report = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    (code(&o), report)
}

#[test]
fn residual_barrier_passes() {
    let dir = tempfile::tempdir().unwrap();
    let (c, rep) = residual(
        dir.path(),
        "barrier",
        r#"{"problem": {"N": 3, "p": 1.9, "q": 0.4},
            "profile": {"family": "Barrier"},
            "box": {"t": [0.0, 1.0], "r": [0.001, 1000.0]}}"#,
    );
    assert_eq!(c, EXIT_PASS);
    assert_eq!(rep["pass"], true);
}

#[test]
fn residual_inverted_shrink_fails() {
    let dir = tempfile::tempdir().unwrap();
    let (c, rep) = residual(
        dir.path(),
        "inverted",
        r#"{"problem": {"N": 1, "p": 2.0, "q": 0.5},
            "profile": {"family": "ShrinkSuper", "envelope_c": 1.0, "theta": 3.0,
                        "sup_norm": 1.0, "inverted": true},
            "box": {"t": [0.0, 16.0], "r": [10.5, 42.0]}}"#,
    );
    assert_eq!(c, EXIT_FAIL);
    assert_eq!(rep["pass"], false);
    assert!(rep["min_margin"].as_f64().unwrap() < 0.0);
}

#[test]
fn residual_tail_passes() {
    let dir = tempfile::tempdir().unwrap();
    let (c, rep) = residual(
        dir.path(),
        "tail",
        r#"{"problem": {"N": 1, "p": 2.0, "q": 0.5},
            "profile": {"family": "TailSub", "horizon": 1.0},
            "box": {"t": [0.0, 0.99], "r": [0.01, 10.0]}}"#,
    );
    assert_eq!(c, EXIT_PASS);
    assert_eq!(rep["pass"], true);
}

const BUMP: &str = r#"{
  "problem": {"N": 1, "p": 2.0, "q": 0.5},
  "ic": {"kind": "Bump", "m": 0.010416666666666666, "r0": 1.0},
  "grid": {"r_max": 4.0, "M": 256},
  "solver": {"t_end": 0.2},
  "output": {"snapshot_every": 4}
}"#;

const FAT_TAIL: &str = r#"{
  "problem": {"N": 1, "p": 2.0, "q": 0.5},
  "ic": {"kind": "FatTail", "c": 1.0, "rho": 0.5},
  "grid": {"r_max": 16.0, "M": 256},
  "solver": {"t_end": 0.2}
}"#;

fn simulate(cfg: &Path, out: &Path) -> Output {
    vhj(&["simulate", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()])
}

fn summary(run: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(run.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn bump_run_goes_extinct_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bump.json");
    fs::write(&cfg, BUMP).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(code(&simulate(&cfg, &a)), EXIT_PASS);
    assert_eq!(code(&simulate(&cfg, &b)), EXIT_PASS);
    assert_eq!(summary(&a)["termination"], "Extinct");
    assert!(summary(&a)["T_e_est"].as_f64().unwrap() > 0.0);
    let sa = fs::read(a.join("series.csv")).unwrap();
    let sb = fs::read(b.join("series.csv")).unwrap();
    assert!(sa.starts_with(b"t,max_u,support_radius,mass\n"));
    assert_eq!(sa, sb);
    assert!(a.join("snapshots/snap_00000.csv").exists());
}

#[test]
fn resolved_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bump.json");
    fs::write(&cfg, BUMP).unwrap();
    let first = dir.path().join("first");
    assert_eq!(code(&simulate(&cfg, &first)), EXIT_PASS);

    let resolved_path = first.join("resolved-config.json");
    let text = fs::read_to_string(&resolved_path).unwrap();
    let resolved = ExperimentConfig::from_json(&text).unwrap();
    assert_eq!(resolved.resolve().unwrap().config, resolved);

    let second = dir.path().join("second");
    assert_eq!(code(&simulate(&resolved_path, &second)), EXIT_PASS);
    assert_eq!(
        fs::read(first.join("series.csv")).unwrap(),
        fs::read(second.join("series.csv")).unwrap()
    );
    assert_eq!(fs::read_to_string(second.join("resolved-config.json")).unwrap(), text);
}

#[test]
fn fat_tail_reaches_horizon_and_reanalyzes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tail.json");
    fs::write(&cfg, FAT_TAIL).unwrap();
    let run = dir.path().join("tail");
    assert_eq!(code(&simulate(&cfg, &run)), EXIT_PASS);
    let s = summary(&run);
    assert_eq!(s["termination"], "HorizonReached");
    assert!(s["T_e_est"].is_null());

    let o = vhj(&["analyze", run.to_str().unwrap()]);
    assert_eq!(code(&o), EXIT_PASS, "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(report["t_e_est"].is_null());
    assert!(run.join("analysis.json").exists());
}

#[test]
fn malformed_config_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, BUMP.replace("\"M\": 256", "\"M\": \"256\"")).unwrap();
    let o = simulate(&cfg, &dir.path().join("run"));
    assert_eq!(code(&o), EXIT_USAGE);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("grid.M"), "{err}");
    assert!(err.contains("line 4"), "{err}");
    assert!(!dir.path().join("run").exists());
}

#[test]
fn unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, BUMP.replace("\"t_end\": 0.2", "\"t_end\": 0.2, \"dt\": 1e-6")).unwrap();
    let o = simulate(&cfg, &dir.path().join("run"));
    assert_eq!(code(&o), EXIT_USAGE);
    assert!(String::from_utf8_lossy(&o.stderr).contains("solver"));
}

#[test]
fn parallel_sweep_matches_sequential_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("bump.json");
    let b = dir.path().join("tail.json");
    fs::write(&a, BUMP).unwrap();
    fs::write(&b, FAT_TAIL).unwrap();
    let sweep = dir.path().join("sweep");
    let o = vhj(&[
        "simulate",
        a.to_str().unwrap(),
        b.to_str().unwrap(),
        "--out-dir",
        sweep.to_str().unwrap(),
        "--jobs",
        "2",
    ]);
    assert_eq!(code(&o), EXIT_PASS);
    let single = dir.path().join("single");
    assert_eq!(code(&simulate(&b, &single)), EXIT_PASS);
    assert_eq!(
        fs::read(sweep.join("tail/series.csv")).unwrap(),
        fs::read(single.join("series.csv")).unwrap()
    );
    assert!(sweep.join("bump/summary.json").exists());
}

#[test]
fn verify_algebra_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("verify.json");
    let o = vhj(&["verify", "algebra", "--trials", "200", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), EXIT_PASS, "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert!(String::from_utf8_lossy(&o.stderr).contains("criterion  1 [PASS]"));
}

#[test]
fn verify_unknown_suite_is_usage_error() {
    assert_eq!(code(&vhj(&["verify", "geometry"])), EXIT_USAGE);
}
