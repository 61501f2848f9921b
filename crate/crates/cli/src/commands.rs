//! One function per subcommand. Each returns the files it wrote.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDate};
use loadrule_core::calendar::CycleClass;
use loadrule_core::eval::{combine_backtests, report, rolling_backtest, Backtest, EvalReport, ReportOptions};
use loadrule_core::hwt::HwtModel;
use loadrule_core::model::Forecaster;
use loadrule_core::rules::RuleId;
use loadrule_core::sarma::expand_at;
use loadrule_core::series::{PeriodStamp, PERIODS_PER_DAY};
use loadrule_core::svdmodel::{Decomposition, WeekMatrix};
use loadrule_core::synth;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{io_err, CliError, CliResult};
use crate::pipeline::{fit_all, forecaster, Fitted, ModelFile, RunData};

/// Creates `path` with the config-hash comment line already written.
pub fn create_output(path: &Path, hash: &str) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    writeln!(w, "# config-hash: {hash}").map_err(io_err(path))?;
    Ok(w)
}

fn finish(mut w: BufWriter<File>, path: &Path) -> CliResult<PathBuf> {
    w.flush().map_err(io_err(path))?;
    Ok(path.to_path_buf())
}

fn csv_out(path: &Path, hash: &str) -> CliResult<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(create_output(path, hash)?))
}

fn csv_finish(w: csv::Writer<BufWriter<File>>, path: &Path) -> CliResult<PathBuf> {
    let inner = w.into_inner().map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    finish(inner, path)
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Data(e.to_string())
}

/// Parses `YYYY-MM-DD:P` with P in 1..=48.
pub fn parse_stamp(s: &str) -> CliResult<PeriodStamp> {
    let bad = || CliError::Config(format!("expected DATE:PERIOD such as 2009-06-01:24, got '{s}'"));
    let (d, p) = s.split_once(':').ok_or_else(bad)?;
    let date: NaiveDate = d.parse().map_err(|_| bad())?;
    let period: u32 = p.parse().map_err(|_| bad())?;
    PeriodStamp::try_new(date, period).ok_or_else(bad)
}

pub fn synth(cfg: &RunConfig, out: Option<&Path>) -> CliResult<Vec<PathBuf>> {
    let generated = synth::generate(&cfg.synth)?;
    let hash = cfg.hash();
    let data_path = out.map(Path::to_path_buf).unwrap_or_else(|| cfg.output_dir.join("synth.csv"));
    let labels_path = data_path.with_file_name(format!(
        "{}-labels.csv",
        data_path.file_stem().and_then(|s| s.to_str()).unwrap_or("synth")
    ));
    let mut w = create_output(&data_path, &hash)?;
    generated.series.write_csv(&mut w)?;
    let mut l = create_output(&labels_path, &hash)?;
    generated.write_labels_csv(&mut l)?;
    Ok(vec![finish(w, &data_path)?, finish(l, &labels_path)?])
}

fn write_fit_summary(cfg: &RunConfig, files: &BTreeMap<String, ModelFile>) -> CliResult<PathBuf> {
    let path = cfg.output_dir.join("fit_summary.csv");
    let mut w = csv_out(&path, &cfg.hash())?;
    w.write_record(["model", "nll", "evaluations", "converged", "sigma_n2", "sigma_s2"]).map_err(csv_err)?;
    for spec in &cfg.models {
        let f = &files[&spec.display_name()];
        let row = match &f.fit {
            Some(r) => [
                f.name.clone(),
                r.nll.to_string(),
                r.evaluations.to_string(),
                r.converged.to_string(),
                r.sigma_n2.to_string(),
                r.sigma_s2.to_string(),
            ],
            None => [f.name.clone(), String::new(), String::new(), String::new(), String::new(), String::new()],
        };
        w.write_record(row).map_err(csv_err)?;
    }
    csv_finish(w, &path)
}

pub fn fit(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let data = RunData::load(cfg)?;
    let files = fit_all(cfg, &data)?;
    let mut out: Vec<PathBuf> = files.values().map(|f| ModelFile::path(&cfg.models_dir(), &f.name)).collect();
    out.push(write_fit_summary(cfg, &files)?);
    Ok(out)
}

fn load_models(cfg: &RunConfig) -> CliResult<Vec<ModelFile>> {
    cfg.models.iter().map(|m| ModelFile::load(&cfg.models_dir(), &m.display_name())).collect()
}

/// Replays observations up to `origin` inclusive.
fn replay(model: &mut dyn Forecaster, ys: &[f64], origin: usize) -> CliResult<()> {
    while model.observed() <= origin {
        let t = model.observed();
        model.observe(ys[t])?;
    }
    Ok(())
}

pub fn forecast(cfg: &RunConfig, origin: PeriodStamp, horizon: usize) -> CliResult<Vec<PathBuf>> {
    if horizon == 0 || horizon > PERIODS_PER_DAY {
        return Err(CliError::Config(format!("horizon {horizon} outside 1..=48")));
    }
    let data = RunData::load(cfg)?;
    let offset = data.start().periods_until(origin);
    if offset < 0 || offset as usize >= data.ys_log.len() {
        return Err(CliError::Config(format!("origin {origin} outside the data span")));
    }
    let origin_idx = offset as usize;
    let path = cfg.output_dir.join("forecasts.csv");
    let mut w = csv_out(&path, &cfg.hash())?;
    w.write_record(["model", "origin_date", "origin_period", "horizon", "date", "period", "forecast_mw"])
        .map_err(csv_err)?;
    for file in load_models(cfg)? {
        let mut model = forecaster(&file, &data)?;
        if model.observed() > origin_idx + 1 {
            return Err(CliError::Config(format!("origin {origin} precedes the end of {}'s seeding span", file.name)));
        }
        replay(model.as_mut(), &data.ys_log, origin_idx)?;
        let preds = model.forecast(horizon)?;
        for (i, p) in preds.iter().enumerate() {
            let target = origin.advance(i as i64 + 1);
            w.write_record([
                file.name.clone(),
                origin.date.to_string(),
                origin.period.to_string(),
                (i + 1).to_string(),
                target.date.to_string(),
                target.period.to_string(),
                p.map(|v| v.exp().to_string()).unwrap_or_default(),
            ])
            .map_err(csv_err)?;
        }
    }
    Ok(vec![csv_finish(w, &path)?])
}

#[derive(Serialize)]
struct JsonReport<'a> {
    config_hash: &'a str,
    report: &'a EvalReport,
}

/// Fits every model, backtests it over the post-sample year and writes the
/// accuracy reports.
pub fn evaluate(cfg: &RunConfig) -> CliResult<(Vec<PathBuf>, EvalReport)> {
    let data = RunData::load(cfg)?;
    let files = fit_all(cfg, &data)?;
    let mut written: Vec<PathBuf> = files.values().map(|f| ModelFile::path(&cfg.models_dir(), &f.name)).collect();
    written.push(write_fit_summary(cfg, &files)?);
    let mut backtests: Vec<Backtest> = Vec::new();
    for spec in &cfg.models {
        let file = &files[&spec.display_name()];
        let mut model = forecaster(file, &data)?;
        log::info!("backtesting {}", file.name);
        backtests.push(rolling_backtest(model.as_mut(), &data.ys_log, data.start(), data.post_start, cfg.horizon)?);
    }
    for c in &cfg.combinations {
        let find = |n: &str| backtests.iter().find(|b| b.model == n).expect("validated combination");
        let combo = combine_backtests(find(&c.models[0]), find(&c.models[1]))?;
        backtests.push(combo);
    }
    let opts = ReportOptions { period_horizons: cfg.report.period_horizons.clone(), period_subset: cfg.report.period_subset };
    let rep = report(&backtests, data.series.values(), &data.special_mask()?, &opts)?;
    let hash = cfg.hash();
    let csv_path = cfg.output_dir.join("report.csv");
    let mut w = create_output(&csv_path, &hash)?;
    rep.write_csv(&mut w)?;
    written.push(finish(w, &csv_path)?);
    let period_path = cfg.output_dir.join("report_periods.csv");
    let mut w = create_output(&period_path, &hash)?;
    rep.write_period_csv(&mut w)?;
    written.push(finish(w, &period_path)?);
    let json_path = cfg.output_dir.join("report.json");
    let text = serde_json::to_string_pretty(&JsonReport { config_hash: &hash, report: &rep })
        .map_err(|e| CliError::Model(e.to_string()))?;
    std::fs::write(&json_path, text + "\n").map_err(io_err(&json_path))?;
    written.push(json_path);
    Ok((written, rep))
}

/// Mean load by weekday and period over the estimation sample.
pub fn profile(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let data = RunData::load(cfg)?;
    let mut sums = [[(0.0f64, 0usize); PERIODS_PER_DAY]; 7];
    for (t, v) in data.series.values()[..data.post_start].iter().enumerate() {
        let s = data.start().advance(t as i64);
        let slot = &mut sums[s.date.weekday().num_days_from_monday() as usize][s.period as usize - 1];
        slot.0 += v;
        slot.1 += 1;
    }
    let path = cfg.output_dir.join("profile.csv");
    let mut w = csv_out(&path, &cfg.hash())?;
    w.write_record(["weekday", "class", "period", "mean_mw"]).map_err(csv_err)?;
    for (d, row) in sums.iter().enumerate() {
        let wd = chrono::Weekday::try_from(d as u8).expect("weekday index");
        for (p, (sum, n)) in row.iter().enumerate() {
            let mean = if *n == 0 { f64::NAN } else { sum / *n as f64 };
            w.write_record([wd.to_string(), CycleClass::of(wd).to_string(), (p + 1).to_string(), mean.to_string()])
                .map_err(csv_err)?;
        }
    }
    Ok(vec![csv_finish(w, &path)?])
}

/// Seasonal indices of a fitted HWT model at the end of the estimation
/// sample.
pub fn indices(cfg: &RunConfig, name: &str) -> CliResult<Vec<PathBuf>> {
    cfg.model(name)?;
    let data = RunData::load(cfg)?;
    let file = ModelFile::load(&cfg.models_dir(), name)?;
    let Fitted::Hwt { params, state } = &file.model else {
        return Err(CliError::Model(format!("{name} is not an HWT model; indices need intraday and intraweek components")));
    };
    let mut model = HwtModel::new(name, *params, state.clone(), data.table(file.spec.rule)?);
    replay(&mut model, &data.ys_log, data.post_start - 1)?;
    let path = cfg.output_dir.join(format!("indices-{name}.csv"));
    let mut w = create_output(&path, &cfg.hash())?;
    model.state.write_indices_csv(&mut w)?;
    Ok(vec![finish(w, &path)?])
}

pub fn rules_dump(cfg: &RunConfig, rule: RuleId, from: Option<NaiveDate>, to: Option<NaiveDate>) -> CliResult<Vec<PathBuf>> {
    let data = RunData::load(cfg)?;
    let table = data.table(Some(rule))?;
    let from = from.unwrap_or(data.start().date);
    let to = to.unwrap_or(data.series.end().date);
    let path = cfg.output_dir.join(format!("rules-{rule}.csv"));
    let mut w = create_output(&path, &cfg.hash())?;
    table.dump_csv(from, to, &mut w)?;
    Ok(vec![finish(w, &path)?])
}

/// Singular values of the estimation-sample normal weeks.
pub fn svd_scree(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let data = RunData::load(cfg)?;
    let table = data.table(Some(RuleId::R1))?;
    let wm = WeekMatrix::from_series(data.estimation(), data.start(), &table)?;
    let path = cfg.output_dir.join("scree.csv");
    let mut w = create_output(&path, &cfg.hash())?;
    Decomposition::new(&wm.rows).write_scree_csv(&mut w)?;
    Ok(vec![finish(w, &path)?])
}

/// Expanded AR and MA lag polynomials of a fitted SARMA model at one period.
pub fn sarma_expand(cfg: &RunConfig, name: &str, at: PeriodStamp) -> CliResult<Vec<PathBuf>> {
    cfg.model(name)?;
    let data = RunData::load(cfg)?;
    let file = ModelFile::load(&cfg.models_dir(), name)?;
    let Fitted::Sarma { params, .. } = &file.model else {
        return Err(CliError::Model(format!("{name} is not a SARMA model")));
    };
    let table = data.table(file.spec.rule)?;
    let offset = data.start().periods_until(at);
    if offset < 0 || offset as usize >= table.len() {
        return Err(CliError::Config(format!("{at} outside the data span")));
    }
    let (ar, ma) = expand_at(params, &table, offset as usize);
    let path = cfg.output_dir.join(format!("sarma-expand-{name}.csv"));
    let mut w = csv_out(&path, &cfg.hash())?;
    w.write_record(["side", "lag", "coefficient"]).map_err(csv_err)?;
    for (side, poly) in [("ar", &ar), ("ma", &ma)] {
        for (lag, c) in poly.terms() {
            w.write_record([side.to_string(), lag.to_string(), c.to_string()]).map_err(csv_err)?;
        }
    }
    Ok(vec![csv_finish(w, &path)?])
}
