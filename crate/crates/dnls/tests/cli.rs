use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn dnls(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dnls"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn setup(config: &str) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, config).unwrap();
    (dir, cfg)
}

fn run_ok(dir: &Path, cmd: &str, out: &str, extra: &[&str]) -> PathBuf {
    let mut args = vec![cmd, "-c", "run.json", "-o", out];
    args.extend_from_slice(extra);
    let o = dnls(dir, &args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    dir.join(out)
}

fn read_table(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn manifest(out: &Path) -> Value {
    serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap()
}

const SMALL_GRID: &str = r#""x_grid": {"half_width": 2, "h": 0.5}"#;

#[test]
fn zero_potential_has_zero_reflection() {
    let (dir, _) = setup(r#"{"potential": {"kind": "sech", "amp": 0.0}}"#);
    let out = run_ok(dir.path(), "direct", "out", &[]);
    let (header, rows) = read_table(&out.join("rho.csv"));
    assert_eq!(header, ["lambda", "re", "im"]);
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r[1] == 0.0 && r[2] == 0.0));
    let (_, rows0) = read_table(&out.join("rho0.csv"));
    assert!(rows0.iter().all(|r| r[1] == 0.0 && r[2] == 0.0));
}

#[test]
fn manifest_cutoff_satisfies_tail_bound() {
    let amp = 0.3;
    let (dir, _) = setup(&format!(r#"{{"potential": {{"kind": "sech", "amp": {amp}}}}}"#));
    let out = run_ok(dir.path(), "direct", "out", &[]);
    let m = manifest(&out);
    let r = m["r"].as_f64().unwrap();
    assert!(r > 0.0);
    for key in ["x0", "x0_left"] {
        let x0 = m[key].as_f64().unwrap();
        // Simpson on the exact profile; the potential is even so both
        // cutoffs face the same tail
        let f = |x: f64| {
            let q = amp / x.cosh();
            (r * q).max(0.5 * q * q)
        };
        let n = 20_000;
        let (a, b) = (x0, 60.0);
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for k in 1..n {
            s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        let tail = s * h / 3.0;
        assert!(tail < 0.45, "{key} = {x0}: tail {tail}");
    }
}

#[test]
fn missing_input_file_fails_cleanly() {
    let (dir, _) = setup(r#"{"potential": {"kind": "file", "path": "absent.csv"}}"#);
    let o = dnls(dir.path(), &["direct", "-c", "run.json", "-o", "out"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("out").exists());

    let o = dnls(dir.path(), &["direct", "-c", "nope.json", "-o", "out"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn file_potential_matches_family() {
    let mut csv = String::from("x,re,im\n");
    for j in 0..=4800 {
        let x = -24.0 + 0.01 * j as f64;
        csv += &format!("{x},{},0\n", 0.3 / x.cosh());
    }
    let (dir, _) = setup(r#"{"potential": {"kind": "file", "path": "q.csv"}}"#);
    fs::write(dir.path().join("q.csv"), csv).unwrap();
    let out = run_ok(dir.path(), "direct", "file", &[]);
    fs::write(dir.path().join("run.json"), r#"{"potential": {"kind": "sech", "amp": 0.3}}"#).unwrap();
    let fam = run_ok(dir.path(), "direct", "fam", &[]);
    let (_, a) = read_table(&out.join("rho.csv"));
    let (_, b) = read_table(&fam.join("rho.csv"));
    let gap = a
        .iter()
        .zip(&b)
        .map(|(u, v)| (u[1] - v[1]).hypot(u[2] - v[2]))
        .fold(0.0, f64::max);
    assert!(gap < 1e-12, "{gap:e}");
}

#[test]
fn each_time_gets_a_potential() {
    let (dir, _) = setup(&format!(
        r#"{{"potential": {{"kind": "sech", "amp": 0.3}}, "times": [0.25, 0.5], "sigma": false, {SMALL_GRID}}}"#
    ));
    let out = run_ok(dir.path(), "evolve-invert", "out", &[]);
    for t in ["0.25", "0.5"] {
        let (header, rows) = read_table(&out.join(format!("q_t{t}.csv")));
        assert_eq!(header, ["x", "re", "im"]);
        assert_eq!(rows.len(), 9);
        let js: Value = serde_json::from_slice(&fs::read(out.join(format!("q_t{t}.json"))).unwrap()).unwrap();
        assert_eq!(js["re"].as_array().unwrap().len(), 9);
    }
    let m = manifest(&out);
    assert_eq!(m["command"], "evolve-invert");
    assert_eq!(m["times"], serde_json::json!([0.25, 0.5]));
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    let arts = m["artifacts"].as_array().unwrap();
    assert_eq!(arts.len(), 6);
    for a in arts {
        let bytes = fs::read(out.join(a["file"].as_str().unwrap())).unwrap();
        assert_eq!(a["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
    }
}

#[test]
fn diag_reports_sigma_min() {
    let (dir, _) = setup(&format!(r#"{{"potential": {{"kind": "sech", "amp": 0.3}}, {SMALL_GRID}}}"#));
    let out = run_ok(dir.path(), "diag", "out", &[]);
    let (header, rows) = read_table(&out.join("diag_t0.csv"));
    assert_eq!(header, ["x", "residual", "sigma_min"]);
    for r in &rows {
        assert!(r[1] < 1e-8 && r[2] > 0.05 && r[2] < 10.0, "{r:?}");
    }
    let d: Value = serde_json::from_slice(&fs::read(out.join("diag.json")).unwrap()).unwrap();
    assert!(d["schwarz"]["min_eigenvalue"].as_f64().unwrap() > 0.0);
    for pc in d["product_condition"].as_array().unwrap() {
        assert!(pc["order0"].as_f64().unwrap() < 1e-6);
    }
}

#[test]
fn roundtrip_recovers_input() {
    let (dir, _) = setup(&format!(
        r#"{{"potential": {{"kind": "sech", "amp": 0.3, "phase": [0, 0.2]}}, "sigma": false, {SMALL_GRID}}}"#
    ));
    let out = run_ok(dir.path(), "roundtrip", "out", &[]);
    let r: Value = serde_json::from_slice(&fs::read(out.join("roundtrip.json")).unwrap()).unwrap();
    assert!(r["rel_l2"].as_f64().unwrap() < 1e-6, "{r}");
}

#[test]
fn compare_pde_reports_errors_and_timings() {
    let (dir, _) = setup(&format!(
        r#"{{"potential": {{"kind": "sech", "amp": 0.3}}, "times": [0.1], {SMALL_GRID}}}"#
    ));
    let out = run_ok(dir.path(), "compare-pde", "out", &[]);
    let rows: Value = serde_json::from_slice(&fs::read(out.join("compare_pde.json")).unwrap()).unwrap();
    let row = &rows[0];
    assert_eq!(row["t"], 0.1);
    assert!(row["l2_error"].as_f64().unwrap() < 1e-4, "{row}");
    for k in ["max_error", "runtime_s", "ist_runtime_s", "pde_runtime_s", "pde_l2_drift"] {
        assert!(row[k].as_f64().unwrap() >= 0.0, "{k}");
    }
    let (header, _) = read_table(&out.join("compare_t0.1.csv"));
    assert_eq!(header, ["x", "ist_re", "ist_im", "pde_re", "pde_im"]);
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let (dir, _) = setup(&format!(
        r#"{{"potential": {{"kind": "sech", "amp": 0.5, "phase": [0, -0.3]}}, "times": [0.2], "sigma": false, {SMALL_GRID}}}"#
    ));
    let a = run_ok(dir.path(), "evolve-invert", "a", &["-j", "1"]);
    let b = run_ok(dir.path(), "evolve-invert", "b", &["-j", "4"]);
    for f in ["q_t0.2.csv", "q_t0.2.json", "diag_t0.2.csv", "manifest.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}
