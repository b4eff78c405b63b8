use std::path::Path;

use qnls::cli::{run_config, Outcome, RunConfig, EXIT_INVALID, PROFILE_FILE, REPORT_FILE};
use qnls::grid::load_profile_csv;
use qnls::solvers::{ReportJson, SolveReport};
use qnls::{Error, ModelParams};

fn config(json: &str, dir: &Path) -> RunConfig {
    RunConfig::from_json(json, &[format!("output_dir={}", serde_json::to_string(dir).unwrap())]).unwrap()
}

fn read_dat(path: &Path) -> Vec<(f64, f64)> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| {
            let mut it = l.split_whitespace().map(|v| v.parse::<f64>().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect()
}

const SOLVE: &str = r#"{"command": "solve", "params": {"N": 2, "p": 7, "a": 1}}"#;

#[test]
fn solve_report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(SOLVE, dir.path());
    assert_eq!(run_config(&c, true).unwrap(), Outcome::Done);

    let stored = ReportJson::load(&dir.path().join(REPORT_FILE)).unwrap();
    assert!(stored.converged && stored.lambda > 0.0);
    assert_eq!(stored.node_count, 0);
    let profile = load_profile_csv(&dir.path().join(&stored.profile_path), 2).unwrap();
    let again = SolveReport::evaluate(profile, &ModelParams::new(2, 7.0, 1.0), 1e-10).unwrap();
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
    assert!(rel(again.energy, stored.energy) <= 1e-10);
    assert!(rel(again.lambda, stored.lambda) <= 1e-10);
    assert!(rel(again.mass, stored.mass) <= 1e-10);
    assert!((again.pohozaev_residual - stored.pohozaev_residual).abs() <= 1e-10);

    let profile_rows = read_dat(&dir.path().join("profile.dat"));
    assert_eq!(profile_rows.len(), again.profile.len());
    let fiber: Vec<f64> = read_dat(&dir.path().join("fiber.dat"))
        .into_iter()
        .map(|(_, e)| e)
        .collect();
    let peak = fiber.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    assert!(fiber[..=peak].windows(2).all(|w| w[1] >= w[0]));
    assert!(fiber[peak..].windows(2).all(|w| w[1] <= w[0]));
    assert!(peak > 0 && peak < fiber.len() - 1);
}

#[test]
fn identical_configs_write_identical_profiles() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        run_config(&config(SOLVE, dir.path()), true).unwrap();
    }
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join(PROFILE_FILE)).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn qp_profile_peak_is_analytic() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(r#"{"command": "qp", "params": {"N": 1, "p": 8}}"#, dir.path());
    assert_eq!(run_config(&c, true).unwrap(), Outcome::Done);
    let q = load_profile_csv(&dir.path().join(PROFILE_FILE), 1).unwrap();
    assert!((q.values()[0] - 4f64.powf(1.0 / 3.0)).abs() <= 1e-4);
}

#[test]
fn exponent_beyond_ceiling_cites_h2() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(
        r#"{"command": "solve", "params": {"N": 3, "p": 13, "a": 1}}"#,
        dir.path(),
    );
    let err = run_config(&c, true).unwrap_err();
    assert!(matches!(err, Error::InvalidParams { .. }));
    assert!(err.to_string().contains("(H2)") && err.to_string().contains("12"));
    assert_eq!(qnls::cli::error_exit_code(&err), EXIT_INVALID);
}

#[test]
fn output_dir_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let c = RunConfig::from_json(r#"{"command": "astar", "params": {"N": 1}}"#, &[]).unwrap();
    std::env::set_var(qnls::cli::config::OUTPUT_DIR_ENV, dir.path());
    assert_eq!(run_config(&c, true).unwrap(), Outcome::Done);
    let text = std::fs::read_to_string(dir.path().join("astar.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!((v["a_star"].as_f64().unwrap() - 2.9619219).abs() < 1e-6);
}

#[test]
fn scan_and_concentration_tables() {
    let dir = tempfile::tempdir().unwrap();
    run_config(
        &config(r#"{"command": "scan-critical", "params": {"N": 1}}"#, dir.path()),
        true,
    )
    .unwrap();
    let scan = std::fs::read_to_string(dir.path().join("scan.csv")).unwrap();
    let lines: Vec<&str> = scan.lines().collect();
    assert_eq!(lines[0], "a,classification,inf_fiber_energy");
    let classes: Vec<&str> = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(classes, ["bounded-below", "degenerate", "unbounded-below"]);

    let c = config(
        r#"{"command": "concentrate", "params": {"N": 1}, "offsets": [0.5, 0.1]}"#,
        dir.path(),
    );
    assert_eq!(run_config(&c, true).unwrap(), Outcome::Done);
    let table = std::fs::read_to_string(dir.path().join("concentration.csv")).unwrap();
    assert_eq!(table.lines().next().unwrap(), "delta,a_n,eps_n,w_l1,dist_l1,dist_l2");
    assert_eq!(table.lines().count(), 3);
    let dat = read_dat(&dir.path().join("concentration.dat"));
    assert_eq!(dat.len(), 2);
    assert!(dat[1].1 < dat[0].1);
}

#[test]
fn excited_run_is_labelled() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(
        r#"{"command": "excited", "params": {"N": 2, "p": 7, "a": 1}, "k": 1}"#,
        dir.path(),
    );
    assert_eq!(run_config(&c, true).unwrap(), Outcome::Done);
    let stored = ReportJson::load(&dir.path().join(REPORT_FILE)).unwrap();
    assert_eq!(stored.node_count, 1);
    assert!(stored.label.unwrap().contains("surrogate"));
}

#[test]
fn gncheck_battery_passes() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(
        r#"{"command": "gncheck", "params": {"N": 3, "p": 5.5}, "seed": 3}"#,
        dir.path(),
    );
    assert_eq!(run_config(&c, true).unwrap(), Outcome::Done);
    let rows = std::fs::read_to_string(dir.path().join("gncheck.csv")).unwrap();
    assert_eq!(rows.lines().count(), 101);
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_qnls");
    let write = |name: &str, text: &str| {
        let path = dir.path().join(name);
        std::fs::write(&path, text).unwrap();
        path
    };
    let ok = write("qp.json", r#"{"command": "qp", "params": {"N": 1, "p": 8}}"#);
    let out = std::process::Command::new(bin)
        .args(["--config", ok.to_str().unwrap(), "--quiet"])
        .env(qnls::cli::config::OUTPUT_DIR_ENV, dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());

    let bad = write(
        "bad.json",
        r#"{"command": "excited", "params": {"N": 2, "p": 7, "a": 1}}"#,
    );
    let out = std::process::Command::new(bin)
        .args(["--config", bad.to_str().unwrap()])
        .env(qnls::cli::config::OUTPUT_DIR_ENV, dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`k`"));

    let strict = write("gn.json", r#"{"command": "gncheck", "params": {"N": 2, "p": 7}}"#);
    let out = std::process::Command::new(bin)
        .args([
            "--config",
            strict.to_str().unwrap(),
            "--override",
            "gn_tolerance=-0.5",
            "--override",
            "gn_fields=5",
        ])
        .env(qnls::cli::config::OUTPUT_DIR_ENV, dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
