use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn ecwm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ecwm")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = ecwm(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Simulates a survey from the given config body and returns its path.
fn simulated(dir: &Path, name: &str, config: &str, seed: u64) -> PathBuf {
    let cfg = write(dir, &format!("{name}.toml"), config);
    let out = dir.join(format!("{name}.csv"));
    ok(&["simulate", "--config", s(&cfg), "--out", s(&out), "--seed", &seed.to_string()]);
    out
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn rows(report: &Value) -> &Vec<Value> {
    report["ladder"].as_array().unwrap()
}

fn row<'a>(report: &'a Value, rung: &str) -> &'a Value {
    rows(report).iter().find(|r| r["rung"] == rung).unwrap_or_else(|| panic!("no {rung} row"))
}

#[test]
fn simulate_is_byte_identical_for_a_seed() {
    let dir = TempDir::new().unwrap();
    let a = simulated(dir.path(), "a", "n = 1000\n", 7);
    let b = simulated(dir.path(), "b", "n = 1000\n", 7);
    let c = simulated(dir.path(), "c", "n = 1000\n", 8);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
    let text = fs::read_to_string(&a).unwrap();
    assert!(text.starts_with("respondent_id,answer,subsample,control_answer,control_a_true,control_b_prob,time_minutes\n"));
    assert!(text.lines().skip(1).any(|l| l.split(',').nth(2) == Some("1")));
    assert!(text.lines().skip(1).any(|l| l.split(',').nth(2) == Some("2")));
}

#[test]
fn all_one_sayers_answer_different() {
    let dir = TempDir::new().unwrap();
    let csv = simulated(dir.path(), "ones", "n = 500\ntheta = 1.0\ngamma = 0.0\nphi = 0.0\n", 1);
    let text = fs::read_to_string(csv).unwrap();
    assert!(text.lines().skip(1).all(|l| l.split(',').nth(1) == Some("DIFFERENT")));
}

#[test]
fn fit_reads_back_every_simulated_record_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let csv = simulated(dir.path(), "s", "n = 3000\ntimer_failure_rate = 0.03\n", 3);
    // The report echoes its own path, so both runs write to the same file.
    let r1 = dir.path().join("r.json");
    let t1 = ok(&["fit", "--survey", s(&csv), "--out", s(&r1), "--bootstrap", "100", "--seed", "5"]);
    let first = fs::read(&r1).unwrap();
    let t2 = ok(&["fit", "--survey", s(&csv), "--out", s(&r1), "--bootstrap", "100", "--seed", "5"]);
    assert_eq!(first, fs::read(&r1).unwrap());
    assert_eq!(t1.stdout, t2.stdout);

    let report = read_json(&r1);
    let att = &report["attrition"];
    assert_eq!(att["n_input"], 3000);
    assert_eq!(att["n_analyzed"].as_u64().unwrap() + att["time_excluded"].as_u64().unwrap(), 3000);
    assert_eq!(report["provenance"]["seed"], 5);
    assert_eq!(report["provenance"]["config"]["bootstrap"], 100);

    let labels: Vec<&str> = rows(&report).iter().map(|r| r["model"].as_str().unwrap()).collect();
    assert_eq!(labels, ["ECWM", "+ one-saying", "+ ra", "+ weights"]);
    assert_eq!(row(&report, "ecwm")["df"], 1);
    assert_eq!(row(&report, "ecwm")["pct_of_ecwm"], 100.0);
    for rung in ["one_saying", "random_answer", "weights"] {
        assert_eq!(row(&report, rung)["df"], 0);
        assert_eq!(row(&report, rung)["g2"], 0.0);
    }
    for r in rows(&report) {
        let ci = r["pi_ci"].as_array().unwrap();
        assert!(ci[0].as_f64().unwrap() <= ci[1].as_f64().unwrap());
        let pct = r["pct_of_ecwm"].as_f64().unwrap();
        assert_eq!((pct * 10.0).round() / 10.0, pct);
    }
    let text = String::from_utf8(t1.stdout).unwrap();
    assert!(text.contains("+ weights"));
}

#[test]
fn zero_fixed_gamma_reproduces_the_one_sayers_row() {
    let dir = TempDir::new().unwrap();
    let csv = simulated(dir.path(), "s", "n = 2000\n", 4);
    let cfg = write(dir.path(), "fit.toml", "gamma_method = \"fixed:0\"\nweighting = false\n");
    let out = dir.path().join("r.json");
    ok(&["fit", "--survey", s(&csv), "--config", s(&cfg), "--out", s(&out)]);
    let report = read_json(&out);
    assert_eq!(rows(&report).len(), 3);
    let (one, ra) = (row(&report, "one_saying"), row(&report, "random_answer"));
    assert_eq!(one["pi_hat"], ra["pi_hat"]);
    assert_eq!(one["theta_hat"], ra["theta_hat"]);
}

#[test]
fn flags_override_the_config_file() {
    let dir = TempDir::new().unwrap();
    let csv = simulated(dir.path(), "s", "n = 2000\n", 9);
    let cfg = write(dir.path(), "fit.toml", "gamma_method = \"naive_2ec\"\ntime_cutoff = 10.0\n");
    let out = dir.path().join("r.json");
    ok(&[
        "fit", "--survey", s(&csv), "--config", s(&cfg), "--out", s(&out), "--gamma-method", "none", "--weights", "off",
        "--time-cutoff", "12",
    ]);
    let report = read_json(&out);
    let echo = &report["provenance"]["config"];
    assert_eq!(echo["gamma_method"], "none");
    assert_eq!(echo["weighting"], false);
    assert_eq!(echo["time_cutoff"], 12.0);
    assert_eq!(rows(&report).len(), 2);
    assert_eq!(report["calibration"]["gamma_hat"], 0.0);
}

#[test]
fn null_population_keeps_corrected_rows_near_truth() {
    let dir = TempDir::new().unwrap();
    let csv = simulated(dir.path(), "s", "n = 60000\npi = 0.25\ntheta = 0.1\ngamma = 0.0\nphi = 0.0\n", 12);
    let out = dir.path().join("r.json");
    ok(&["fit", "--survey", s(&csv), "--out", s(&out)]);
    let report = read_json(&out);
    assert!(report["calibration"]["gamma_hat"].as_f64().unwrap() < 0.02);
    for rung in ["one_saying", "random_answer", "weights"] {
        let pi = row(&report, rung)["pi_hat"].as_f64().unwrap();
        assert!((pi - 0.25).abs() < 0.02, "{rung}: {pi}");
    }
}

#[test]
fn fast_random_responders_give_a_decreasing_ladder() {
    let dir = TempDir::new().unwrap();
    let csv = simulated(dir.path(), "s", "n = 60000\nlink_random_to_speed = true\n", 13);
    let out = dir.path().join("r.json");
    ok(&["fit", "--survey", s(&csv), "--out", s(&out)]);
    let report = read_json(&out);
    let pcts: Vec<f64> = rows(&report).iter().map(|r| r["pct_of_ecwm"].as_f64().unwrap()).collect();
    assert!(pcts.windows(2).all(|w| w[1] < w[0]), "{pcts:?}");
    let ra = row(&report, "random_answer")["pi_hat"].as_f64().unwrap();
    let ecwm = row(&report, "ecwm")["pi_hat"].as_f64().unwrap();
    assert!((ra - 0.25).abs() < (ecwm - 0.25).abs());
}

#[test]
fn sensitivity_default_cell_matches_fit() {
    let dir = TempDir::new().unwrap();
    let csv = simulated(dir.path(), "s", "n = 4000\n", 21);
    let fit_out = dir.path().join("fit.json");
    let grid_out = dir.path().join("grid.json");
    ok(&["fit", "--survey", s(&csv), "--out", s(&fit_out)]);
    let text = ok(&["sensitivity", "--survey", s(&csv), "--out", s(&grid_out)]);
    let grid = read_json(&grid_out);
    let cells = grid["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 9);
    assert_eq!(grid["w0"].as_array().unwrap().len(), 3);
    let defaults: Vec<&Value> = cells.iter().filter(|c| c["default"] == true).collect();
    assert_eq!(defaults.len(), 1);
    assert_eq!(defaults[0]["pi_hat"], row(&read_json(&fit_out), "weights")["pi_hat"]);
    assert!(String::from_utf8(text.stdout).unwrap().contains('*'));
}

#[test]
fn bias_surface_reproduces_quoted_values() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("bias.csv");
    ok(&["bias-surface", "--out", s(&out)]);
    let text = fs::read_to_string(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("pi,theta,gamma,expected_pi_hat,bias"));
    let table: Vec<[f64; 4]> = lines
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            [v[0], v[1], v[2], v[3]]
        })
        .collect();
    let lookup = |pi: f64, theta: f64, gamma: f64| {
        table.iter().find(|r| r[0] == pi && r[1] == theta && r[2] == gamma).map(|r| r[3]).unwrap()
    };
    assert!((lookup(0.25, 0.0, 0.75) - 0.4375).abs() < 1e-12);
    assert!((lookup(0.25, 0.1, 0.75) - 0.4625).abs() < 1e-12);
    assert!(table.iter().filter(|r| r[0] == 0.5).all(|r| (r[3] - 0.5).abs() < 1e-12));
    assert!(table.iter().all(|r| r[1] + r[2] <= 1.0 + 1e-12));
    assert!(!table.iter().any(|r| r[1] == 0.3 && r[2] == 0.75));
}

#[test]
fn exit_codes_classify_failures() {
    let dir = TempDir::new().unwrap();
    let code = |args: &[&str]| ecwm(args).status.code().unwrap();

    let no_subsample = write(dir.path(), "a.csv", "respondent_id,answer\n1,SAME\n");
    let out = ecwm(&["fit", "--survey", s(&no_subsample)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("subsample"));

    let no_control = write(dir.path(), "b.csv", "answer,subsample\nSAME,1\nDIFFERENT,2\n");
    assert_eq!(code(&["fit", "--survey", s(&no_control)]), 2);

    let bad_value = write(dir.path(), "c.csv", "answer,subsample\nSAME,1\nMAYBE,2\n");
    let out = ecwm(&["fit", "--survey", s(&bad_value), "--gamma-method", "none", "--weights", "off"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let one_group = write(dir.path(), "d.csv", "answer,subsample\nSAME,1\nDIFFERENT,1\n");
    assert_eq!(code(&["fit", "--survey", s(&one_group), "--gamma-method", "none", "--weights", "off"]), 3);

    let bad_key = write(dir.path(), "bad.toml", "colour = 1\n");
    assert_eq!(code(&["simulate", "--config", s(&bad_key)]), 2);
    let half = write(dir.path(), "half.toml", "p = 0.5\n");
    assert_eq!(code(&["fit", "--survey", s(&no_control), "--config", s(&half)]), 2);
    assert_eq!(code(&["fit", "--survey", s(&dir.path().join("missing.csv"))]), 2);
}

#[test]
fn shipped_fixture_is_reproducible_and_fits() {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("survey.csv");
    ok(&["simulate", "--config", s(&fixtures.join("simulate.toml")), "--out", s(&out)]);
    assert_eq!(fs::read(&out).unwrap(), fs::read(fixtures.join("survey.csv")).unwrap());
    let report = dir.path().join("r.json");
    ok(&["fit", "--survey", s(&fixtures.join("survey.csv")), "--config", s(&fixtures.join("fit.toml")), "--out", s(&report)]);
    assert_eq!(rows(&read_json(&report)).len(), 4);
}
