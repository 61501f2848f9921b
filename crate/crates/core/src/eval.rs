//! Rolling-origin backtests, percentage error measures, naive benchmarks,
//! forecast combination and accuracy reports.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use chrono::{Datelike, Duration, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Forecaster;
use crate::rules::AnnualLagTable;
use crate::series::{PeriodStamp, PERIODS_PER_DAY, PERIODS_PER_WEEK};

/// Forecasts from one origin, in MW.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastSet {
    pub model: String,
    /// Stamp of the last observation absorbed before forecasting.
    pub origin: PeriodStamp,
    /// Horizons `1..=H`; `None` where the model gives no forecast.
    pub predictions: Vec<Option<f64>>,
}

/// Averages two forecast sets in MW.
pub fn combine(a: &ForecastSet, b: &ForecastSet) -> Result<ForecastSet> {
    if a.origin != b.origin || a.predictions.len() != b.predictions.len() {
        return Err(Error::MismatchedHorizons(format!(
            "{} at {} with {} horizons vs {} at {} with {} horizons",
            a.model,
            a.origin,
            a.predictions.len(),
            b.model,
            b.origin,
            b.predictions.len()
        )));
    }
    Ok(ForecastSet {
        model: combo_name(&a.model, &b.model),
        origin: a.origin,
        predictions: a
            .predictions
            .iter()
            .zip(&b.predictions)
            .map(|(x, y)| Some((x.as_ref()? + y.as_ref()?) / 2.0))
            .collect(),
    })
}

fn combo_name(a: &str, b: &str) -> String {
    format!("combo({a},{b})")
}

/// All forecast sets of one model over a contiguous run of origins.
#[derive(Debug, Clone, PartialEq)]
pub struct Backtest {
    pub model: String,
    /// Stamp of series offset 0.
    pub series_start: PeriodStamp,
    /// Series offset of the first origin.
    pub first_origin: usize,
    pub horizon: usize,
    /// Row-major origins × horizons in MW; NaN where no forecast exists.
    pub values: Vec<f64>,
    /// Origins whose forecast failed, with the error text.
    pub failed_origins: Vec<(usize, String)>,
}

impl Backtest {
    pub fn origins(&self) -> usize {
        self.values.len() / self.horizon.max(1)
    }

    /// Forecast in MW for origin offset `origin` at horizon `h` (1-based).
    pub fn get(&self, origin: usize, h: usize) -> Option<f64> {
        let i = origin.checked_sub(self.first_origin)?;
        let v = *self.values.get(i * self.horizon + h - 1)?;
        (!v.is_nan()).then_some(v)
    }

    pub fn set(&self, index: usize) -> ForecastSet {
        let row = &self.values[index * self.horizon..(index + 1) * self.horizon];
        ForecastSet {
            model: self.model.clone(),
            origin: self.series_start.advance((self.first_origin + index) as i64),
            predictions: row.iter().map(|v| (!v.is_nan()).then_some(*v)).collect(),
        }
    }

    pub fn sets(&self) -> impl Iterator<Item = ForecastSet> + '_ {
        (0..self.origins()).map(|i| self.set(i))
    }

    /// Horizons with at least one forecast.
    pub fn produced_horizons(&self) -> Vec<usize> {
        (1..=self.horizon)
            .filter(|h| (0..self.origins()).any(|i| !self.values[i * self.horizon + h - 1].is_nan()))
            .collect()
    }
}

/// Elementwise MW average of two backtests over the same origins.
pub fn combine_backtests(a: &Backtest, b: &Backtest) -> Result<Backtest> {
    if a.first_origin != b.first_origin || a.horizon != b.horizon || a.values.len() != b.values.len() {
        return Err(Error::MismatchedHorizons(format!("{} and {} cover different origins", a.model, b.model)));
    }
    let mut failed = a.failed_origins.clone();
    failed.extend(b.failed_origins.iter().cloned());
    failed.sort();
    failed.dedup_by_key(|f| f.0);
    Ok(Backtest {
        model: combo_name(&a.model, &b.model),
        series_start: a.series_start,
        first_origin: a.first_origin,
        horizon: a.horizon,
        values: a.values.iter().zip(&b.values).map(|(x, y)| (x + y) / 2.0).collect(),
        failed_origins: failed,
    })
}

/// Feeds `ys_log` to `model` and forecasts `1..=horizon` from every origin
/// `post_start − 1 ..= len − 1 − horizon`. The model sees each observation
/// only after every forecast whose origin precedes it has been made.
pub fn rolling_backtest<F: Forecaster + ?Sized>(
    model: &mut F,
    ys_log: &[f64],
    series_start: PeriodStamp,
    post_start: usize,
    horizon: usize,
) -> Result<Backtest> {
    if horizon == 0 || horizon > PERIODS_PER_DAY {
        return Err(Error::ConfigInvalid(format!("horizon must lie in 1..=48, got {horizon}")));
    }
    if post_start == 0 || post_start + horizon > ys_log.len() {
        return Err(Error::SeriesTooShort { needed: post_start.max(1) + horizon, have: ys_log.len() });
    }
    if model.observed() > post_start {
        return Err(Error::ConfigInvalid(format!(
            "{} has already absorbed {} observations, past the post-sample start {post_start}",
            model.name(),
            model.observed()
        )));
    }
    let first_origin = post_start - 1;
    let last_origin = ys_log.len() - 1 - horizon;
    let mut values = Vec::with_capacity((last_origin - first_origin + 1) * horizon);
    let mut failed = Vec::new();
    for origin in first_origin..=last_origin {
        while model.observed() <= origin {
            let t = model.observed();
            model.observe(ys_log[t])?;
        }
        match model.forecast(horizon) {
            Ok(f) => values.extend(f.into_iter().map(|v| v.map_or(f64::NAN, f64::exp))),
            Err(e) => {
                failed.push((origin, e.to_string()));
                values.extend(std::iter::repeat_n(f64::NAN, horizon));
            }
        }
    }
    if !failed.is_empty() {
        log::warn!("{}: {} origins failed", model.name(), failed.len());
    }
    Ok(Backtest {
        model: model.name().to_string(),
        series_start,
        first_origin,
        horizon,
        values,
        failed_origins: failed,
    })
}

/// Mean absolute percentage error over pairs selected by `mask`, as a
/// fraction.
pub fn mape(actuals: &[f64], forecasts: &[f64], mask: Option<&[bool]>) -> Result<f64> {
    let (sum, n) = masked_pairs(actuals, forecasts, mask).fold((0.0, 0usize), |(s, n), (a, f)| (s + ((a - f) / a).abs(), n + 1));
    if n == 0 {
        return Err(Error::EmptyMask("no targets selected for MAPE".into()));
    }
    Ok(sum / n as f64)
}

/// Root mean squared percentage error, as a fraction.
pub fn rmspe(actuals: &[f64], forecasts: &[f64], mask: Option<&[bool]>) -> Result<f64> {
    let (sum, n) = masked_pairs(actuals, forecasts, mask).fold((0.0, 0usize), |(s, n), (a, f)| (s + ((a - f) / a).powi(2), n + 1));
    if n == 0 {
        return Err(Error::EmptyMask("no targets selected for RMSPE".into()));
    }
    Ok((sum / n as f64).sqrt())
}

fn masked_pairs<'a>(actuals: &'a [f64], forecasts: &'a [f64], mask: Option<&'a [bool]>) -> impl Iterator<Item = (f64, f64)> + 'a {
    actuals
        .iter()
        .zip(forecasts)
        .enumerate()
        .filter(move |(i, _)| mask.is_none_or(|m| m[*i]))
        .map(|(_, (a, f))| (*a, *f))
}

/// Naive benchmark kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BenchmarkKind {
    /// Same special day last year; a week earlier on normal days.
    SeasonalRandomWalk,
    /// Mean of up to four earlier same special days; of four earlier same
    /// weekdays on normal days.
    SeasonalMovingAverage4,
    /// Same period of the most recent observed Sunday before the target day.
    RecentSunday,
}

impl BenchmarkKind {
    pub const ALL: [BenchmarkKind; 3] = [Self::SeasonalRandomWalk, Self::SeasonalMovingAverage4, Self::RecentSunday];

    pub fn tag(self) -> &'static str {
        match self {
            Self::SeasonalRandomWalk => "srw",
            Self::SeasonalMovingAverage4 => "sma4",
            Self::RecentSunday => "recent-sunday",
        }
    }
}

impl fmt::Display for BenchmarkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// A naive benchmark driven like any other model. `table` supplies day
/// types and same-special-day lags; it should be built with Rule 1.
#[derive(Debug, Clone)]
pub struct Benchmark {
    kind: BenchmarkKind,
    name: String,
    table: Arc<AnnualLagTable>,
    history: Vec<f64>,
}

impl Benchmark {
    pub fn new(kind: BenchmarkKind, table: Arc<AnnualLagTable>) -> Self {
        Self { kind, name: kind.tag().to_string(), table, history: Vec::new() }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn kind(&self) -> BenchmarkKind {
        self.kind
    }

    fn at(&self, i: usize) -> Option<f64> {
        self.history.get(i).copied()
    }

    /// Earlier same-special-day offsets of `t`, most recent first.
    fn same_special_offsets(&self, t: usize, count: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(count);
        let mut pos = t;
        while out.len() < count && pos < self.table.len() {
            let lag = self.table.lag_at(pos);
            let Some(p) = pos.checked_sub(lag) else { break };
            out.push(p);
            pos = p;
        }
        out
    }

    fn predict(&self, t: usize) -> Option<f64> {
        if t >= self.table.len() {
            return None;
        }
        let special = self.table.is_special_at(t);
        match self.kind {
            BenchmarkKind::SeasonalRandomWalk => {
                let lag = if special { self.table.lag_at(t) } else { PERIODS_PER_WEEK };
                self.at(t.checked_sub(lag)?)
            }
            BenchmarkKind::SeasonalMovingAverage4 => {
                let offsets: Vec<usize> = if special {
                    self.same_special_offsets(t, 4)
                } else {
                    (1..=4).filter_map(|k| t.checked_sub(k * PERIODS_PER_WEEK)).collect()
                };
                let vals: Vec<f64> = offsets.iter().filter_map(|&i| self.at(i)).collect();
                (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
            }
            BenchmarkKind::RecentSunday => {
                let stamp = self.table.start().advance(t as i64);
                let back = match stamp.date.weekday() {
                    Weekday::Sun => 7,
                    wd => wd.num_days_from_sunday() as i64,
                };
                let mut sunday = stamp.date - Duration::days(back);
                loop {
                    let s = PeriodStamp::new(sunday, stamp.period);
                    let i = self.table.start().periods_until(s);
                    if i < 0 {
                        return None;
                    }
                    if let Some(v) = self.at(i as usize) {
                        return Some(v);
                    }
                    sunday -= Duration::days(7);
                }
            }
        }
    }
}

impl Forecaster for Benchmark {
    fn name(&self) -> &str {
        &self.name
    }

    fn observed(&self) -> usize {
        self.history.len()
    }

    fn observe(&mut self, y_log: f64) -> Result<()> {
        self.history.push(y_log);
        Ok(())
    }

    fn forecast(&self, horizon: usize) -> Result<Vec<Option<f64>>> {
        let n = self.history.len();
        Ok((0..horizon).map(|h| self.predict(n + h)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subset {
    All,
    Special,
    Normal,
}

impl Subset {
    pub const ALL: [Subset; 3] = [Self::All, Self::Special, Self::Normal];
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::All => "all",
            Self::Special => "special",
            Self::Normal => "normal",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub model: String,
    pub subset: Subset,
    pub horizon: usize,
    /// NaN when `n` is zero.
    pub mape: f64,
    pub rmspe: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodRow {
    pub model: String,
    pub subset: Subset,
    pub horizon: usize,
    pub period: usize,
    pub mape: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    /// Horizons for the per-period-of-day breakdown.
    pub period_horizons: Vec<usize>,
    /// Day subset of the per-period breakdown.
    pub period_subset: Subset,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self { period_horizons: vec![12, 48], period_subset: Subset::Special }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<ReportRow>,
    pub periods: Vec<PeriodRow>,
    /// Model/subset/horizon combinations with no targets.
    pub empty: Vec<String>,
    /// Failed origins per model.
    pub failures: Vec<(String, usize)>,
}

#[derive(Default, Clone, Copy)]
struct Acc {
    abs: f64,
    sq: f64,
    n: usize,
}

impl Acc {
    fn add(&mut self, pe: f64) {
        self.abs += pe.abs();
        self.sq += pe * pe;
        self.n += 1;
    }
}

/// Builds per-horizon accuracy for every backtest. `actual_mw[t]` is the
/// observed load at series offset `t`; `special[t]` marks special-day
/// targets.
pub fn report(backtests: &[Backtest], actual_mw: &[f64], special: &[bool], options: &ReportOptions) -> Result<EvalReport> {
    if backtests.is_empty() {
        return Err(Error::EmptyMask("no backtests to report".into()));
    }
    let mut out = EvalReport { rows: Vec::new(), periods: Vec::new(), empty: Vec::new(), failures: Vec::new() };
    for bt in backtests {
        let h_max = bt.horizon;
        let mut acc = vec![[Acc::default(); 3]; h_max];
        let mut per = vec![vec![Acc::default(); PERIODS_PER_DAY]; options.period_horizons.len()];
        for i in 0..bt.origins() {
            let origin = bt.first_origin + i;
            for h in 1..=h_max {
                let f = bt.values[i * h_max + h - 1];
                let t = origin + h;
                if f.is_nan() || t >= actual_mw.len() {
                    continue;
                }
                let a = actual_mw[t];
                let pe = (a - f) / a;
                let sp = special.get(t).copied().unwrap_or(false);
                acc[h - 1][0].add(pe);
                acc[h - 1][if sp { 1 } else { 2 }].add(pe);
                for (k, &ph) in options.period_horizons.iter().enumerate() {
                    let keep = match options.period_subset {
                        Subset::All => true,
                        Subset::Special => sp,
                        Subset::Normal => !sp,
                    };
                    if ph == h && keep {
                        let p = bt.series_start.advance(t as i64).period as usize;
                        per[k][p - 1].add(pe);
                    }
                }
            }
        }
        for h in 1..=h_max {
            for (s, subset) in Subset::ALL.iter().enumerate() {
                let a = acc[h - 1][s];
                if a.n == 0 {
                    out.empty.push(format!("{}/{subset}/{h}", bt.model));
                }
                let (m, r) = if a.n == 0 { (f64::NAN, f64::NAN) } else { (a.abs / a.n as f64, (a.sq / a.n as f64).sqrt()) };
                out.rows.push(ReportRow { model: bt.model.clone(), subset: *subset, horizon: h, mape: m, rmspe: r, n: a.n });
            }
        }
        for (k, &ph) in options.period_horizons.iter().enumerate() {
            if ph > h_max {
                continue;
            }
            for (p, a) in per[k].iter().enumerate() {
                out.periods.push(PeriodRow {
                    model: bt.model.clone(),
                    subset: options.period_subset,
                    horizon: ph,
                    period: p + 1,
                    mape: if a.n == 0 { f64::NAN } else { a.abs / a.n as f64 },
                    n: a.n,
                });
            }
        }
        out.failures.push((bt.model.clone(), bt.failed_origins.len()));
    }
    Ok(out)
}

impl EvalReport {
    pub fn row(&self, model: &str, subset: Subset, horizon: usize) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.model == model && r.subset == subset && r.horizon == horizon)
    }

    /// MAPE pooled over the given horizons (all horizons with targets when
    /// `None`).
    pub fn pooled_mape(&self, model: &str, subset: Subset, horizons: Option<&[usize]>) -> Option<f64> {
        let (s, n) = self
            .rows
            .iter()
            .filter(|r| r.model == model && r.subset == subset && r.n > 0)
            .filter(|r| horizons.is_none_or(|hs| hs.contains(&r.horizon)))
            .fold((0.0, 0usize), |(s, n), r| (s + r.mape * r.n as f64, n + r.n));
        (n > 0).then(|| s / n as f64)
    }

    pub fn models(&self) -> Vec<String> {
        let mut v: Vec<String> = Vec::new();
        for r in &self.rows {
            if !v.contains(&r.model) {
                v.push(r.model.clone());
            }
        }
        v
    }

    /// `model,subset,horizon,mape,rmspe,n`
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["model", "subset", "horizon", "mape", "rmspe", "n"])?;
        for r in &self.rows {
            w.write_record([
                r.model.clone(),
                r.subset.to_string(),
                r.horizon.to_string(),
                fmt_num(r.mape),
                fmt_num(r.rmspe),
                r.n.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// `model,horizon,period,mape`
    pub fn write_period_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["model", "horizon", "period", "mape"])?;
        for r in &self.periods {
            w.write_record([r.model.clone(), r.horizon.to_string(), r.period.to_string(), fmt_num(r.mape)])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }
}

fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:.10}")
    }
}
