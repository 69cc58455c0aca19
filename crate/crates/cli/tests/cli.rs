use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str], config: Option<&str>) -> i32 {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cylbif"));
    cmd.args(args).arg("--out").arg(dir.join("out"));
    if let Some(text) = config {
        let path = dir.join("config.json");
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap().status.code().unwrap()
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out/summary.json")).unwrap()).unwrap()
}

fn csv_rows(dir: &Path, name: &str) -> Vec<Vec<String>> {
    fs::read_to_string(dir.join("out").join(name))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn morse_reports_one_dimensional_index() {
    let dir = TempDir::new().unwrap();
    let code = run(
        dir.path(),
        &["morse"],
        Some(r#"{"model": {"type": "lane_emden", "p": 4.0}}"#),
    );
    assert_eq!(code, 0);
    let s = summary(dir.path());
    assert_eq!(s["results"]["m_xn"], 1);
    assert_eq!(s["results"]["random_checks_passed"], 20);
    assert_eq!(s["config_hash"].as_str().unwrap().len(), 64);
    for key in ["newton", "linear", "eigen", "shoot_amplitude", "nodal_rel"] {
        assert!(s["tolerances"][key].is_number(), "{key}");
    }
}

#[test]
fn base_eigs_on_the_unit_interval() {
    let dir = TempDir::new().unwrap();
    assert_eq!(run(dir.path(), &["base-eigs"], Some(r#"{"cutoff": 100}"#)), 0);
    let rows = csv_rows(dir.path(), "base-eigs.csv");
    let value = |j: usize| rows[j][1].parse::<f64>().unwrap();
    assert_eq!(rows[1][0], "1");
    assert!((value(1) - 9.869604401089358).abs() < 1e-12);
    assert!((value(2) - 39.47841760435743).abs() < 1e-12);
    assert_eq!(rows.len(), 4);
}

#[test]
fn bifurcation_points_for_a_given_spectrum() {
    let dir = TempDir::new().unwrap();
    let config = r#"{"alphas": [-5.0], "t_range": {"t_max": 5.0}}"#;
    assert_eq!(run(dir.path(), &["bifurcation-points"], Some(config)), 0);
    let rows = csv_rows(dir.path(), "bifurcation-points.csv");
    assert_eq!(rows.len(), 3);
    for (k, row) in rows.iter().enumerate() {
        let expected = (k + 1) as f64 * std::f64::consts::PI / 5f64.sqrt();
        assert!((row[0].parse::<f64>().unwrap() - expected).abs() < 1e-12);
        assert_eq!(row[2], (k + 1).to_string());
    }
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(run(dir.path(), &["frobnicate"], None), 64);
    assert_eq!(
        run(dir.path(), &["morse"], Some(r#"{"t_range": {"t_min": 3, "t_max": 2}}"#)),
        2
    );
    assert_eq!(run(dir.path(), &["morse"], Some("not json")), 2);
    assert_eq!(
        run(dir.path(), &["morse", "--config", "/nonexistent/config.json"], None),
        2
    );
    assert_eq!(
        run(
            dir.path(),
            &["verify-decomposition"],
            Some(r#"{"base": {"type": "disk", "radius": 1}}"#)
        ),
        2
    );
    let below = r#"{"direction": -1, "grids": {"nx": 32, "ny": 32}, "backtrack_ratio": 0}"#;
    assert_eq!(run(dir.path(), &["continue"], Some(below)), 4);
    assert_eq!(summary(dir.path())["status"], "error");
}

#[test]
fn continue_writes_both_half_branches() {
    let dir = TempDir::new().unwrap();
    let config = r#"{"grids": {"nx": 32, "ny": 32}, "continuation": {"steps": 2}, "backtrack_steps": 2}"#;
    assert_eq!(run(dir.path(), &["continue"], Some(config)), 0);
    let rows = csv_rows(dir.path(), "continue.csv");
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r[5] == "1"));
    for name in ["branch_plus_1.csv", "branch_minus_2.csv"] {
        assert_eq!(csv_rows(dir.path(), name).len(), 32 * 32);
    }
    let s = summary(dir.path());
    assert!(s["results"]["reflection_defect"].as_f64().unwrap() < 1e-6);
}

#[test]
fn identical_configs_give_identical_csv() {
    let config = r#"{"grids": {"nx": 24, "ny": 24}, "continuation": {"steps": 2}, "backtrack_steps": 1}"#;
    let outputs: Vec<(Vec<u8>, Vec<u8>)> = (0..2)
        .map(|_| {
            let dir = TempDir::new().unwrap();
            assert_eq!(run(dir.path(), &["morse"], Some(config)), 0);
            let morse = fs::read(dir.path().join("out/morse.csv")).unwrap();
            assert_eq!(run(dir.path(), &["continue", "--threads", "3"], Some(config)), 0);
            (morse, fs::read(dir.path().join("out/continue.csv")).unwrap())
        })
        .collect();
    assert_eq!(outputs[0], outputs[1]);
}
