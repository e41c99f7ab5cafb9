use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn stormctl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stormctl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

#[test]
fn model_curve_starts_at_zero() {
    let o = stormctl(&["model", "--ps", "1", "--pe", "1", "--m", "1", "--t-end", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t_ms,count"));
    assert_eq!(lines.next(), Some("0,0"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn model_rejects_zero_growth() {
    let o = stormctl(&["model", "--ps", "1", "--pe", "1", "--m", "0", "--t-end", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("non-zero"), "{}", stderr(&o));
}

#[test]
fn model_writes_csv_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = stormctl(&[
        "--out", out, "--plot", "model", "--ps", "10", "--pe", "500", "--m", "-0.5", "--t-end", "2", "--step", "0.5",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::read_to_string(dir.path().join("ptr.csv")).unwrap().lines().count(),
        6
    );
    assert!(fs::read_to_string(dir.path().join("ptr.svg"))
        .unwrap()
        .starts_with("<svg"));
}

#[test]
fn fitted_table3_curve_passes_through_the_rise() {
    let o = stormctl(&["fit", "--data", "table3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let fit = json(&o);
    let again = json(&stormctl(&["fit", "--data", "table3"]));
    assert_eq!(fit, again);
    let rmse = fit["rmse"].as_f64().unwrap();
    let (ps, pe, m) = (
        fit["p_start"].to_string(),
        fit["p_end"].to_string(),
        fit["m"].to_string(),
    );
    let args = [
        "model",
        "--ps",
        &ps,
        "--pe",
        &pe,
        "--m",
        &m,
        "--t-end",
        "1.9",
        "--step",
        "0.1",
        "--unclamped",
    ];
    let curve = stormctl(&args);
    assert!(curve.status.success(), "{}", stderr(&curve));
    let model: Vec<f64> = stdout(&curve)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    let rise = [
        0.0, 1900.0, 3200.0, 4200.0, 5200.0, 6600.0, 7600.0, 8900.0, 9900.0, 11100.0, 16400.0, 25900.0, 35300.0,
        44500.0, 54300.0, 63300.0, 72700.0, 82000.0, 91300.0, 107200.0,
    ];
    assert_eq!(model.len(), rise.len());
    let sse: f64 = model.iter().zip(rise).map(|(p, c)| (p - c).powi(2)).sum();
    let curve_rmse = (sse / rise.len() as f64).sqrt();
    assert!((curve_rmse - rmse).abs() <= 1e-6 * rmse, "{curve_rmse} vs {rmse}");
}

#[test]
fn fit_of_empty_file_reports_insufficient_points() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    fs::write(&path, "").unwrap();
    let o = stormctl(&["fit", "--data", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("insufficient points"), "{}", stderr(&o));
}

#[test]
fn fit_recovers_synthetic_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = stormctl(&[
        "--out",
        out,
        "model",
        "--ps",
        "800",
        "--pe",
        "20000",
        "--m",
        "1.5",
        "--t-end",
        "2",
        "--step",
        "0.05",
        "--unclamped",
    ]);
    assert!(o.status.success());
    let o = stormctl(&["fit", "--data", dir.path().join("ptr.csv").to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let fit = json(&o);
    for (key, want) in [("p_start", 800.0), ("p_end", 20000.0), ("m", 1.5)] {
        let got = fit[key].as_f64().unwrap();
        assert!((got - want).abs() <= 0.01 * want, "{key}: {got}");
    }
}

#[test]
fn detect_table4_is_quiet() {
    let o = stormctl(&["detect", "--data", "table4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = json(&o);
    assert_eq!(report["storm_found"], false);
    assert_eq!(report["tickets"].as_array().unwrap().len(), 0);
}

#[test]
fn detect_table1_finds_a_ptr_storm() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = stormctl(&["--out", out, "detect", "--data", "table1", "--reference", "table4"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let report = json(&o);
    let tickets = report["tickets"].as_array().unwrap();
    assert!(!tickets.is_empty());
    assert_eq!(tickets[0]["cause"], "ptr_deviation");
    assert!(report["first_trigger"]["t_ms"].as_f64().unwrap() <= 1.0);
    let log = fs::read_to_string(dir.path().join("tickets.jsonl")).unwrap();
    assert_eq!(log.lines().count(), tickets.len());
}

#[test]
fn malformed_row_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "t_ms,count\n0,0\n0.1,12\n0.2,lots\n").unwrap();
    let o = stormctl(&["detect", "--data", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(stormctl(&["storm"]).status.code(), Some(2));
}

fn digests(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, Sha256::digest(fs::read(&p).unwrap()).to_vec())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn sim_with_same_seed_writes_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut sums = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = stormctl(&["--seed", "7", "--plot", "--out", out.to_str().unwrap(), "sim", "smurf"]);
        assert!(o.status.success(), "{}", stderr(&o));
        sums.push(digests(&out));
    }
    assert_eq!(sums[0].len(), 4);
    assert_eq!(sums[0], sums[1]);
}

#[test]
fn table5_scenario_is_clipped_only_with_agents() {
    let with = json(&stormctl(&["sim", "table5-control"]));
    assert!(with["max_tnbp_mb"].as_f64().unwrap() <= 2.5);
    assert_eq!(with["violations_after_engage"], 0);
    let without = json(&stormctl(&["sim", "table5-control", "--no-agents"]));
    assert!(without["max_tnbp_mb"].as_f64().unwrap() > 2.5);
}

#[test]
fn sim_accepts_a_scenario_file_and_rejects_bad_ones() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    fs::write(
        &path,
        r#"{"schema": 1, "name": "tiny", "node_count": 3, "link_rate": 10000000, "duration_ms": 5.0}"#,
    )
    .unwrap();
    let o = stormctl(&["sim", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(json(&o)["ticks"], 5);
    fs::write(
        &path,
        r#"{"schema": 9, "name": "x", "node_count": 3, "link_rate": 1, "duration_ms": 1.0}"#,
    )
    .unwrap();
    assert_eq!(stormctl(&["sim", path.to_str().unwrap()]).status.code(), Some(2));
}
