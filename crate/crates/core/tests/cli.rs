use std::fs;
use std::process::{Command, Output};

use holosparse::channel::matrix_from_csv;

fn holosparse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holosparse"))
        .args(args)
        .env_remove("HOLOSPARSE_THREADS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn preset_lists_and_emits_configs() {
    let list = holosparse(&["preset"]);
    assert!(list.status.success());
    for name in [
        "fig2a-desk",
        "fig2b-desk",
        "fig2c-desk",
        "fig2a-paper",
        "fig2b-paper",
        "fig2c-paper",
        "fig1-map",
    ] {
        assert!(stdout(&list).lines().any(|l| l == name), "{name} missing");
    }
    let one = holosparse(&["preset", "fig2a-desk"]);
    assert!(one.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&one)).unwrap();
    assert_eq!(v["n_rf"], 16);
    assert_eq!(v["pilot_length"], 32);

    let bad = holosparse(&["preset", "fig9"]);
    assert!(!bad.status.success());
}

#[test]
fn run_writes_results_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("a.json");
    let out = dir.path().join("results.csv");
    assert!(holosparse(&["preset", "fig2a-desk", "--out", cfg.to_str().unwrap()])
        .status
        .success());
    let run = holosparse(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--trials",
        "2",
        "--seed",
        "5",
        "--threads",
        "2",
    ]);
    assert!(run.status.success(), "{}", stderr(&run));
    let csv = fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("sweep,estimator,nmse,nmse_db,trials,seconds"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 25);
    assert!(rows.iter().all(|r| r.len() == 6 && r[4] == "2"));
    assert_eq!(rows[1][1], "WD-OMP");
}

#[test]
fn bad_config_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    let text = stdout(&holosparse(&["preset", "fig2a-desk"])).replace("\"trials\": 200", "\"trials\": 0");
    fs::write(&cfg, text).unwrap();
    let run = holosparse(&["run", "--config", cfg.to_str().unwrap()]);
    assert!(!run.status.success());
    assert!(stderr(&run).contains("trials"), "{}", stderr(&run));

    let text = stdout(&holosparse(&["preset", "fig2a-desk"])).replace("\"snr_db\"", "\"snr\"");
    fs::write(&cfg, text).unwrap();
    let run = holosparse(&["run", "--config", cfg.to_str().unwrap()]);
    assert!(!run.status.success());
    assert!(stderr(&run).contains("snr"), "{}", stderr(&run));
}

#[test]
fn full_size_presets_require_long() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("p.json");
    assert!(holosparse(&["preset", "fig2a-paper", "--out", cfg.to_str().unwrap()])
        .status
        .success());
    let run = holosparse(&["run", "--config", cfg.to_str().unwrap()]);
    assert!(!run.status.success());
    assert!(stderr(&run).contains("--long"), "{}", stderr(&run));
}

#[test]
fn variance_map_config_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("m.json");
    let out = dir.path().join("map.csv");
    assert!(holosparse(&["preset", "fig1-map", "--out", cfg.to_str().unwrap()])
        .status
        .success());
    let run = holosparse(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(run.status.success(), "{}", stderr(&run));
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().next(), Some("l_x,l_y,sigma2"));
    assert_eq!(csv.lines().count(), 3281 + 1);
    let total: f64 = csv
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-6);
}

#[test]
fn validate_reports_counts() {
    let v = holosparse(&["validate"]);
    assert!(v.status.success(), "{}", stdout(&v));
    let text = stdout(&v);
    assert!(text.lines().last().unwrap().ends_with("passed, 0 failed"));
    assert!(text.lines().filter(|l| l.starts_with("[PASS]")).count() >= 8);
}

#[test]
fn export_channel_writes_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("a.json");
    let out = dir.path().join("chan");
    assert!(holosparse(&["preset", "fig2a-desk", "--out", cfg.to_str().unwrap()])
        .status
        .success());
    let run = holosparse(&[
        "export-channel",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--trial",
        "4",
    ]);
    assert!(run.status.success(), "{}", stderr(&run));
    let header: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("header.json")).unwrap()).unwrap();
    assert_eq!(header["h_a_dims"], serde_json::json!([61, 5]));
    let h_a = matrix_from_csv(&fs::read_to_string(out.join("h_a.csv")).unwrap()).unwrap();
    let h = matrix_from_csv(&fs::read_to_string(out.join("h.csv")).unwrap()).unwrap();
    assert_eq!(h_a.shape(), (61, 5));
    assert_eq!(h.shape(), (289, 25));
    // Orthonormal bases preserve energy.
    assert!((h.norm() - h_a.norm()).abs() < 1e-6 * h_a.norm());
}
