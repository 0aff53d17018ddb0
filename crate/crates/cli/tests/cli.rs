use std::path::Path;
use std::process::{Command, Output};

fn lacuna(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lacuna"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn verify_auto_passes() {
    let d = tempfile::tempdir().unwrap();
    let out = lacuna(d.path(), &["verify"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(d.path(), "conditions.csv");
    assert!(csv.starts_with("# schema: lacuna.conditions/1\ncondition,m,lhs_log2,rhs_log2,pass\n"));
    assert!(!csv.contains(",false"));
    assert!(String::from_utf8_lossy(&out.stdout).contains("q = 66"));
}

#[test]
fn verify_small_base_strict_fails_with_condition() {
    let d = tempfile::tempdir().unwrap();
    let out = lacuna(d.path(), &["verify", "--q", "3"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("c_plus"), "{err}");
    assert!(read(d.path(), "conditions.csv").contains(",false"));
}

#[test]
fn verify_small_base_demo_warns() {
    let d = tempfile::tempdir().unwrap();
    let out = lacuna(d.path(), &["verify", "--q", "3", "--mode", "demo"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn series_without_terms_is_the_circle() {
    let d = tempfile::tempdir().unwrap();
    let out = lacuna(d.path(), &["series", "--terms", "0", "--samples", "64"]);
    assert!(out.status.success());
    let csv = read(d.path(), "series.csv");
    let r = rows(&csv);
    assert_eq!(r[0], ["theta", "f", "F", "n1", "n2"]);
    assert_eq!(r.len(), 65);
    for row in &r[1..] {
        assert_eq!(row[1], "0.0");
        assert_eq!(row[2], "1.0");
    }
}

#[test]
fn malformed_config_is_a_usage_error() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("bad.toml");
    std::fs::write(&cfg, "[params]\nq = \"seven\"\n").unwrap();
    let out = lacuna(d.path(), &["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::write(&cfg, "[mesh]\nwidth = 3\n").unwrap();
    let out = lacuna(d.path(), &["series", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = lacuna(d.path(), &["series", "--mode", "loose"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_values_are_overridden_by_flags() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.toml");
    std::fs::write(&cfg, "[params]\nq = 7\nmode = \"demo\"\nterms = 1\n[mesh]\nsamples = 32\n").unwrap();
    let out = lacuna(d.path(), &["series", "--config", cfg.to_str().unwrap(), "--samples", "48"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("q = 7, M = 1, 48 samples"));
}

fn control_sweep(dir: &Path) -> Output {
    let cfg = dir.join("sweep.toml");
    std::fs::write(
        &cfg,
        "[sweep]\nterms = [0]\nn_theta = [64, 128]\nspecs = [[2.0, 0.25], [4.0, 0.1]]\n",
    )
    .unwrap();
    lacuna(dir, &["sweep", "--config", cfg.to_str().unwrap()])
}

#[test]
fn control_sweep_is_flat() {
    let d = tempfile::tempdir().unwrap();
    let out = control_sweep(d.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let r = rows(&read(d.path(), "blowup.csv"));
    let head = &r[0];
    let col = |name: &str| head.iter().position(|h| h == name).unwrap();
    for row in &r[1..] {
        let g: f64 = row[col("flux_growth")].parse().unwrap();
        assert!((g - 1.0).abs() < 1e-12, "{g}");
    }
}

#[test]
fn csv_bodies_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(control_sweep(a.path()).status.success());
    let out = Command::new(env!("CARGO_BIN_EXE_lacuna"))
        .env("LACUNA_THREADS", "1")
        .args(["sweep", "--config", a.path().join("sweep.toml").to_str().unwrap(), "--out"])
        .arg(b.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(read(a.path(), "blowup.csv"), read(b.path(), "blowup.csv"));
}

#[test]
fn json_reports_carry_a_header() {
    let d = tempfile::tempdir().unwrap();
    let out = lacuna(d.path(), &["solve", "--q", "7", "--mode", "demo", "--terms", "1", "--n-theta", "64", "--format", "json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&read(d.path(), "solution.json")).unwrap();
    assert_eq!(doc["header"]["command"], "solve");
    assert_eq!(doc["header"]["tool"], "lacuna");
    let g = &doc["body"]["green"];
    let rel = g["rel_error"].as_f64().unwrap();
    assert!(rel < 1e-6, "{rel}");
}
