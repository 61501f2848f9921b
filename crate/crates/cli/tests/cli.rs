//! End-to-end runs of the `loadrule` binary on a small synthetic series.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

/// Four synthetic years, the last one post-sample.
const BASE_CONFIG: &str = r#"
seed = 7
output_dir = "out"
post_sample_start = "2008-01-01"

[synth]
start = "2005-01-01"
years = 4

[[models]]
kind = "hwt"
max_evals = 400

[[models]]
kind = "hwt"
rule = "R3"
max_evals = 400

[[models]]
kind = "srw"
"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loadrule")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

/// Data rows of a CSV written by the binary, header included.
fn rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config-hash: "), "{} lacks the hash line", path.display());
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn evaluate_reports_every_model_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASE_CONFIG);
    let cfg = cfg.to_str().unwrap();
    let first = dir.path().join("a");
    let second = dir.path().join("b");
    ok(&["evaluate", "-c", cfg, "--output-dir", first.to_str().unwrap()]);
    ok(&["evaluate", "-c", cfg, "--output-dir", second.to_str().unwrap()]);

    let report = rows(&first.join("report.csv"));
    let header = &report[0];
    let model_col = header.iter().position(|h| h == "model").unwrap();
    let models: BTreeSet<&str> = report[1..].iter().map(|r| r[model_col].as_str()).collect();
    assert_eq!(models, BTreeSet::from(["hwt", "rb-hwt-R3", "srw"]));

    for name in ["report.csv", "report_periods.csv", "report.json", "fit_summary.csv", "models/hwt.json"] {
        assert_eq!(fs::read(first.join(name)).unwrap(), fs::read(second.join(name)).unwrap(), "{name} differs");
    }
    rows(&first.join("report_periods.csv"));
    rows(&first.join("fit_summary.csv"));
    let json: serde_json::Value = serde_json::from_slice(&fs::read(first.join("report.json")).unwrap()).unwrap();
    assert!(json["config_hash"].as_str().is_some_and(|h| h.len() == 64));
}

#[test]
fn forecast_writes_one_row_per_horizon_and_model() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASE_CONFIG);
    let cfg = cfg.to_str().unwrap();
    ok(&["fit", "-c", cfg]);
    ok(&["forecast", "-c", cfg, "--origin", "2008-06-02:20"]);
    let table = rows(&dir.path().join("out/forecasts.csv"));
    assert_eq!(table.len(), 1 + 3 * 48);
    let value_col = table[0].iter().position(|h| h == "forecast_mw").unwrap();
    for r in &table[1..] {
        let v: f64 = r[value_col].parse().unwrap();
        assert!(v.is_finite() && v > 0.0);
    }
}

#[test]
fn profile_has_five_distinct_cycle_classes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASE_CONFIG);
    ok(&["profile", "-c", cfg.to_str().unwrap()]);
    let table = rows(&dir.path().join("out/profile.csv"));
    assert_eq!(table.len(), 1 + 7 * 48);
    let classes: BTreeSet<&str> = table[1..].iter().map(|r| r[1].as_str()).collect();
    assert_eq!(classes.len(), 5);
    // Monday has its own class; weekends sit below midweek.
    let day = |wd: &str| -> Vec<f64> { table[1..].iter().filter(|r| r[0] == wd).map(|r| r[3].parse().unwrap()).collect() };
    let (mon, tue, sat) = (day("Mon"), day("Tue"), day("Sat"));
    assert_eq!(mon.len(), 48);
    assert_ne!(mon, tue);
    assert!(sat.iter().sum::<f64>() < tue.iter().sum::<f64>());
}

#[test]
fn post_sample_data_does_not_touch_fitted_models() {
    let dir = tempfile::tempdir().unwrap();
    let gen_cfg = write_config(dir.path(), BASE_CONFIG);
    let data = dir.path().join("load.csv");
    ok(&["synth", "-c", gen_cfg.to_str().unwrap(), "--out", data.to_str().unwrap()]);

    let with_data = format!("{BASE_CONFIG}\n[data]\npath = \"load.csv\"\n");
    let cfg = write_config(dir.path(), &with_data);
    let cfg = cfg.to_str().unwrap();
    let (clean, dirty) = (dir.path().join("clean"), dir.path().join("dirty"));
    ok(&["fit", "-c", cfg, "--output-dir", clean.to_str().unwrap()]);

    let text = fs::read_to_string(&data).unwrap();
    let corrupted: Vec<String> = text
        .lines()
        .map(|l| if l.starts_with("2008-") { format!("{},99999", l.rsplit_once(',').unwrap().0) } else { l.to_string() })
        .collect();
    fs::write(&data, corrupted.join("\n") + "\n").unwrap();
    ok(&["fit", "-c", cfg, "--output-dir", dirty.to_str().unwrap()]);

    for name in ["hwt", "rb-hwt-R3", "srw"] {
        let a = fs::read(clean.join(format!("models/{name}.json"))).unwrap();
        let b = fs::read(dirty.join(format!("models/{name}.json"))).unwrap();
        assert_eq!(a, b, "{name} changed with post-sample data");
    }
}

#[test]
fn diagnostics_write_hash_stamped_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASE_CONFIG);
    let cfg = cfg.to_str().unwrap();
    ok(&["fit", "-c", cfg]);
    ok(&["indices", "-c", cfg, "--model", "rb-hwt-R3"]);
    ok(&["rules", "dump", "-c", cfg, "--from", "2007-12-20", "--to", "2007-12-31"]);
    ok(&["svd", "scree", "-c", cfg]);
    ok(&["synth", "-c", cfg]);
    let out = dir.path().join("out");
    let mut seen = 0;
    for entry in fs::read_dir(&out).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "csv") {
            rows(&path);
            seen += 1;
        }
    }
    assert!(seen >= 6, "only {seen} CSV files");
    let dump = rows(&out.join("rules-R3.csv"));
    assert_eq!(dump.len(), 1 + 12 * 48);
}

#[test]
fn exit_codes_follow_error_class() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASE_CONFIG);
    let cfg = cfg.to_str().unwrap();
    let code = |args: &[&str]| run(args).status.code().unwrap();

    assert_eq!(code(&["no-such-command"]), 2);
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["fit", "-c", dir.path().join("missing.toml").to_str().unwrap()]), 2);

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "unknown_key = 1\n").unwrap();
    assert_eq!(code(&["fit", "-c", bad.to_str().unwrap()]), 2);
    assert_eq!(code(&["forecast", "-c", cfg, "--origin", "2008-06-02:49"]), 2);
    assert_eq!(code(&["fit", "-c", cfg, "--post-sample-start", "1990-01-01"]), 2);

    let data = dir.path().join("neg.csv");
    fs::write(&data, "date,period,load_mw\n2005-01-01,1,-5\n").unwrap();
    assert_eq!(code(&["fit", "-c", cfg, "--data", data.to_str().unwrap()]), 3);

    assert_eq!(code(&["indices", "-c", cfg, "--model", "hwt"]), 4, "indices before fit");
    ok(&["fit", "-c", cfg]);
    assert_eq!(code(&["indices", "-c", cfg, "--model", "srw"]), 4);
    assert_eq!(code(&["indices", "-c", cfg, "--model", "nope"]), 2);
}
