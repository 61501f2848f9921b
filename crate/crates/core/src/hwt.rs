//! Triple seasonal Holt-Winters exponential smoothing with residual
//! autocorrelation adjustment and rule-based intrayear lags (RB-HWT).
//!
//! The state holds a level, an intraday index over 48 periods, an intraweek
//! index over 336 periods and an intrayear index with one entry per absorbed
//! observation. On special days the intraday and intraweek indices are
//! frozen and the intrayear index is smoothed with its own parameter, so the
//! intrayear index carries the special-day profile. With every day normal
//! the recursion is plain HWT.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{fit_transformed, FitResult, MinimizeOptions, Transform, VARIANCE_FLOOR};
use crate::model::Forecaster;
use crate::rules::{AnnualLagTable, NORMAL_LAG};
use crate::series::{PeriodStamp, PERIODS_PER_DAY, PERIODS_PER_WEEK};

/// Windows used to seed the state from the head of a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedConfig {
    pub level_weeks: usize,
    pub intraday_weeks: usize,
    pub intraweek_weeks: usize,
    /// Length of the seeded intrayear span, in days.
    pub intrayear_days: usize,
}

impl Default for SeedConfig {
    fn default() -> Self {
        Self {
            level_weeks: 2,
            intraday_weeks: 4,
            intraweek_weeks: 8,
            intrayear_days: 365,
        }
    }
}

impl SeedConfig {
    pub fn seed_len(&self) -> usize {
        self.intrayear_days * PERIODS_PER_DAY
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HwtParams {
    pub lambda: f64,
    pub delta: f64,
    pub omega: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub phi: f64,
    pub sigma_n2: f64,
    pub sigma_s2: f64,
}

impl Default for HwtParams {
    fn default() -> Self {
        Self {
            lambda: 0.1,
            delta: 0.05,
            omega: 0.05,
            alpha1: 0.05,
            alpha2: 0.05,
            phi: 0.3,
            sigma_n2: 1.0,
            sigma_s2: 1.0,
        }
    }
}

impl HwtParams {
    pub fn zero() -> Self {
        Self {
            lambda: 0.0,
            delta: 0.0,
            omega: 0.0,
            alpha1: 0.0,
            alpha2: 0.0,
            phi: 0.0,
            sigma_n2: 1.0,
            sigma_s2: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = [self.lambda, self.delta, self.omega, self.alpha1, self.alpha2];
        if unit.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::ConfigInvalid("smoothing parameters must lie in [0, 1]".into()));
        }
        if !(self.phi > -1.0 && self.phi < 1.0) {
            return Err(Error::ConfigInvalid("phi must lie in (-1, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HwtState {
    pub level: f64,
    /// By period of day, `0..48`.
    pub intraday: Vec<f64>,
    /// By period of week, `0..336`, Monday period 1 first.
    pub intraweek: Vec<f64>,
    /// By series offset; one entry per seeded or absorbed observation.
    pub intrayear: Vec<f64>,
    pub last_error: f64,
    pub start: PeriodStamp,
}

impl HwtState {
    /// Offset of the next observation.
    pub fn next_offset(&self) -> usize {
        self.intrayear.len()
    }

    fn slots(&self, offset: usize) -> (usize, usize) {
        let s = self.start.advance(offset as i64);
        (s.period as usize - 1, s.period_of_week() - 1)
    }

    /// Writes `component,position,value` rows: 48 intraday values, 336
    /// intraweek values and the full intrayear history.
    pub fn write_indices_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["component", "position", "date", "period", "value"])?;
        for (i, v) in self.intraday.iter().enumerate() {
            w.write_record(["intraday", &(i + 1).to_string(), "", "", &v.to_string()])?;
        }
        for (i, v) in self.intraweek.iter().enumerate() {
            w.write_record(["intraweek", &(i + 1).to_string(), "", "", &v.to_string()])?;
        }
        for (i, v) in self.intrayear.iter().enumerate() {
            let s = self.start.advance(i as i64);
            w.write_record([
                "intrayear",
                &i.to_string(),
                &s.date.to_string(),
                &s.period.to_string(),
                &v.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Indices of the first `count` 336-period blocks from the series start
/// that contain no special day.
pub(crate) fn normal_blocks(table: &AnnualLagTable, len: usize, count: usize) -> Vec<usize> {
    (0..len / PERIODS_PER_WEEK)
        .filter(|b| {
            (b * PERIODS_PER_WEEK..(b + 1) * PERIODS_PER_WEEK)
                .step_by(PERIODS_PER_DAY)
                .chain(std::iter::once((b + 1) * PERIODS_PER_WEEK - 1))
                .all(|t| !table.is_special_at(t))
        })
        .take(count)
        .collect()
}

/// Seeds level, intraday, intraweek and first-year intrayear indices.
pub fn init_state(
    head_log: &[f64],
    start: PeriodStamp,
    table: &AnnualLagTable,
    seed: &SeedConfig,
) -> Result<HwtState> {
    let seed_len = seed.seed_len();
    if head_log.len() < 2 * seed_len {
        return Err(Error::InsufficientHistory(format!(
            "seeding needs {} observations, have {}",
            2 * seed_len,
            head_log.len()
        )));
    }
    let level_n = seed.level_weeks * PERIODS_PER_WEEK;
    let level = head_log[..level_n].iter().sum::<f64>() / level_n as f64;

    let blocks_needed = seed.intraday_weeks.max(seed.intraweek_weeks);
    let blocks = normal_blocks(table, seed_len, blocks_needed);
    if blocks.len() < blocks_needed {
        return Err(Error::InsufficientHistory(format!(
            "seeding needs {blocks_needed} normal weeks in the first year, found {}",
            blocks.len()
        )));
    }
    let pod = |t: usize| start.advance(t as i64).period as usize - 1;
    let pow = |t: usize| start.advance(t as i64).period_of_week() - 1;

    let mut intraday = vec![0.0; PERIODS_PER_DAY];
    let mut counts = vec![0usize; PERIODS_PER_DAY];
    for &b in &blocks[..seed.intraday_weeks] {
        for t in b * PERIODS_PER_WEEK..(b + 1) * PERIODS_PER_WEEK {
            intraday[pod(t)] += head_log[t];
            counts[pod(t)] += 1;
        }
    }
    for (d, c) in intraday.iter_mut().zip(&counts) {
        *d = *d / *c as f64 - level;
    }

    let mut intraweek = vec![0.0; PERIODS_PER_WEEK];
    let mut wcounts = vec![0usize; PERIODS_PER_WEEK];
    for &b in &blocks[..seed.intraweek_weeks] {
        for t in b * PERIODS_PER_WEEK..(b + 1) * PERIODS_PER_WEEK {
            intraweek[pow(t)] += head_log[t];
            wcounts[pow(t)] += 1;
        }
    }
    for (i, (w, c)) in intraweek.iter_mut().zip(&wcounts).enumerate() {
        *w = *w / *c as f64 - level - intraday[i % PERIODS_PER_DAY];
    }

    let intrayear = (0..seed_len)
        .map(|t| head_log[t] - (level + intraday[pod(t)] + intraweek[pow(t)]))
        .collect();
    Ok(HwtState {
        level,
        intraday,
        intraweek,
        intrayear,
        last_error: 0.0,
        start,
    })
}

/// Result of absorbing one observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    /// `e_t`: observation minus the seasonal-plus-level mean.
    pub error: f64,
    /// One-step prediction made before seeing the observation, including the
    /// `φ·e_{t−1}` adjustment.
    pub prediction: f64,
}

/// Absorbs `y` at the state's next offset using intrayear lag `lag`.
pub fn filter_step(
    state: &mut HwtState,
    params: &HwtParams,
    y: f64,
    is_special: bool,
    lag: usize,
) -> Result<Step> {
    let t = state.next_offset();
    let a_prev = t
        .checked_sub(lag)
        .map(|i| state.intrayear[i])
        .ok_or(Error::MissingAnnualIndex { offset: t, lag })?;
    let (d, w) = state.slots(t);
    let mean = state.level + state.intraday[d] + state.intraweek[w] + a_prev;
    let prediction = mean + params.phi * state.last_error;
    let e = y - mean;
    state.level += params.lambda * e;
    let alpha = if is_special {
        params.alpha2
    } else {
        state.intraday[d] += params.delta * e;
        state.intraweek[w] += params.omega * e;
        params.alpha1
    };
    state.intrayear.push(a_prev + alpha * e);
    state.last_error = e;
    Ok(Step { error: e, prediction })
}

/// Lag for offset `t`, falling back to 52 weeks when the table's lag points
/// before the series start. The flag reports whether the table's lag held.
pub(crate) fn usable_lag(table: &AnnualLagTable, t: usize) -> Option<(usize, bool)> {
    let lag = table.lag_at(t);
    if lag <= t {
        Some((lag, true))
    } else if NORMAL_LAG <= t {
        Some((NORMAL_LAG, false))
    } else {
        None
    }
}

/// Forecasts `1..=horizon` steps from the last absorbed observation.
pub fn forecast(
    state: &HwtState,
    params: &HwtParams,
    table: &AnnualLagTable,
    horizon: usize,
) -> Result<Vec<f64>> {
    let origin_next = state.next_offset();
    let mut phi_h = 1.0;
    (1..=horizon)
        .map(|h| {
            phi_h *= params.phi;
            let t = origin_next + h - 1;
            let (lag, _) = usable_lag(table, t).ok_or(Error::MissingAnnualIndex { offset: t, lag: table.lag_at(t) })?;
            let idx = t - lag;
            if idx >= origin_next {
                return Err(Error::MissingAnnualIndex { offset: t, lag });
            }
            let (d, w) = state.slots(t);
            Ok(state.level
                + state.intraday[d]
                + state.intraweek[w]
                + state.intrayear[idx]
                + phi_h * state.last_error)
        })
        .collect()
}

/// Runs the filter over `ys[from..]`, returning one-step prediction errors
/// and a mask of periods whose table lag was usable.
pub fn run_filter(
    state: &mut HwtState,
    params: &HwtParams,
    table: &AnnualLagTable,
    ys: &[f64],
) -> Result<(Vec<f64>, Vec<bool>)> {
    let from = state.next_offset();
    let mut errs = Vec::with_capacity(ys.len().saturating_sub(from));
    let mut usable = Vec::with_capacity(errs.capacity());
    for (i, &y) in ys.iter().enumerate().skip(from) {
        let (lag, ok) = usable_lag(table, i).ok_or(Error::MissingAnnualIndex { offset: i, lag: table.lag_at(i) })?;
        let step = filter_step(state, params, y, table.is_special_at(i), lag)?;
        errs.push(y - step.prediction);
        usable.push(ok);
    }
    Ok((errs, usable))
}

/// Fit settings.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HwtFitConfig {
    pub seed: SeedConfig,
    pub start: HwtParams,
    pub optimizer: MinimizeOptions,
}

/// Two-class NLL of the filter over `ys` from a seeded state.
fn objective(seeded: &HwtState, params: &HwtParams, table: &AnnualLagTable, ys: &[f64]) -> (f64, f64, f64) {
    let mut state = seeded.clone();
    state.intrayear.reserve(ys.len());
    let (mut ss_n, mut ss_s, mut n_n, mut n_s) = (0.0, 0.0, 0usize, 0usize);
    for (i, &y) in ys.iter().enumerate().skip(seeded.next_offset()) {
        let Some((lag, ok)) = usable_lag(table, i) else {
            return (f64::INFINITY, f64::NAN, f64::NAN);
        };
        let special = table.is_special_at(i);
        let Ok(step) = filter_step(&mut state, params, y, special, lag) else {
            return (f64::INFINITY, f64::NAN, f64::NAN);
        };
        if ok {
            let r = y - step.prediction;
            if special {
                ss_s += r * r;
                n_s += 1;
            } else {
                ss_n += r * r;
                n_n += 1;
            }
        }
    }
    let term = |ss: f64, n: usize| {
        if n == 0 {
            (0.0, f64::NAN)
        } else {
            let v = (ss / n as f64).max(VARIANCE_FLOOR);
            (0.5 * n as f64 * ((2.0 * std::f64::consts::PI * v).ln() + 1.0), v)
        }
    };
    let (a, vn) = term(ss_n, n_n);
    let (b, vs) = term(ss_s, n_s);
    let nll = a + b;
    (if nll.is_finite() { nll } else { f64::INFINITY }, vn, vs)
}

/// Maximum-likelihood fit on an estimation sample. `alpha2` is estimated
/// only when the table marks special days after the seed span.
pub fn fit(
    ys: &[f64],
    start: PeriodStamp,
    table: &AnnualLagTable,
    cfg: &HwtFitConfig,
) -> Result<(HwtParams, HwtState, FitResult)> {
    let seeded = init_state(ys, start, table, &cfg.seed)?;
    let rb = (cfg.seed.seed_len()..ys.len()).any(|t| table.is_special_at(t));
    let s = cfg.start;
    let (transforms, start_vec): (Vec<Transform>, Vec<f64>) = if rb {
        (
            vec![Transform::Unit, Transform::Unit, Transform::Unit, Transform::Unit, Transform::Unit, Transform::Symmetric],
            vec![s.lambda, s.delta, s.omega, s.alpha1, s.alpha2, s.phi],
        )
    } else {
        (
            vec![Transform::Unit, Transform::Unit, Transform::Unit, Transform::Unit, Transform::Symmetric],
            vec![s.lambda, s.delta, s.omega, s.alpha1, s.phi],
        )
    };
    let unpack = |v: &[f64]| -> HwtParams {
        if rb {
            HwtParams { lambda: v[0], delta: v[1], omega: v[2], alpha1: v[3], alpha2: v[4], phi: v[5], sigma_n2: 1.0, sigma_s2: 1.0 }
        } else {
            HwtParams { lambda: v[0], delta: v[1], omega: v[2], alpha1: v[3], alpha2: v[3], phi: v[4], sigma_n2: 1.0, sigma_s2: 1.0 }
        }
    };
    let (best, res) = fit_transformed(&transforms, &start_vec, &cfg.optimizer, |v| {
        objective(&seeded, &unpack(v), table, ys).0
    });
    let mut params = unpack(&best);
    let (nll, vn, vs) = objective(&seeded, &params, table, ys);
    params.sigma_n2 = vn;
    params.sigma_s2 = if vs.is_nan() { vn } else { vs };
    if !res.converged {
        log::warn!("HWT fit did not converge after {} evaluations", res.evals);
    }
    let fit = FitResult {
        params: best,
        nll,
        evaluations: res.evals,
        converged: res.converged,
        sigma_n2: params.sigma_n2,
        sigma_s2: params.sigma_s2,
    };
    Ok((params, seeded, fit))
}

/// A fitted HWT model driven observation by observation.
#[derive(Debug, Clone)]
pub struct HwtModel {
    name: String,
    pub params: HwtParams,
    pub state: HwtState,
    table: Arc<AnnualLagTable>,
}

impl HwtModel {
    /// `state` is typically the seeded state returned by [`fit`].
    pub fn new(name: impl Into<String>, params: HwtParams, state: HwtState, table: Arc<AnnualLagTable>) -> Self {
        Self { name: name.into(), params, state, table }
    }

    pub fn table(&self) -> &AnnualLagTable {
        &self.table
    }
}

impl Forecaster for HwtModel {
    fn name(&self) -> &str {
        &self.name
    }

    fn observed(&self) -> usize {
        self.state.next_offset()
    }

    fn observe(&mut self, y_log: f64) -> Result<()> {
        let t = self.state.next_offset();
        let (lag, _) = usable_lag(&self.table, t).ok_or(Error::MissingAnnualIndex { offset: t, lag: self.table.lag_at(t) })?;
        filter_step(&mut self.state, &self.params, y_log, self.table.is_special_at(t), lag)?;
        Ok(())
    }

    fn forecast(&self, horizon: usize) -> Result<Vec<Option<f64>>> {
        Ok(forecast(&self.state, &self.params, &self.table, horizon)?
            .into_iter()
            .map(Some)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn start() -> PeriodStamp {
        // A Monday.
        PeriodStamp::new(NaiveDate::from_ymd_opt(2001, 1, 1).unwrap(), 1)
    }

    fn table(days: usize, special: &[bool]) -> AnnualLagTable {
        AnnualLagTable::constant(start(), days, 364, special)
    }

    #[test]
    fn constant_series_seeds_to_zero_indices() {
        let n = 2 * 365 * 48;
        let ys = vec![10.0; n];
        let st = init_state(&ys, start(), &table(730, &[]), &SeedConfig::default()).unwrap();
        assert_eq!(st.level, 10.0);
        assert!(st.intraday.iter().chain(&st.intraweek).chain(&st.intrayear).all(|v| v.abs() < 1e-12));
        assert_eq!(st.last_error, 0.0);
    }

    #[test]
    fn intraday_sinusoid_leaves_intraweek_near_zero() {
        let n = 2 * 365 * 48;
        let ys: Vec<f64> = (0..n)
            .map(|t| 10.0 + 0.3 * (2.0 * std::f64::consts::PI * (t % 48) as f64 / 48.0).sin())
            .collect();
        let st = init_state(&ys, start(), &table(730, &[]), &SeedConfig::default()).unwrap();
        let max_w = st.intraweek.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(max_w < 1e-6, "{max_w}");
    }

    #[test]
    fn suppressed_first_year_special_day_seeds_negative() {
        let n = 2 * 365 * 48;
        let special_day = 200;
        let ys: Vec<f64> = (0..n)
            .map(|t| if t / 48 == special_day { 10.0 + (0.8f64).ln() } else { 10.0 })
            .collect();
        let mut flags = vec![false; 730];
        flags[special_day] = true;
        let st = init_state(&ys, start(), &table(730, &flags), &SeedConfig::default()).unwrap();
        let a = st.intrayear[special_day * 48 + 20];
        assert!((a - (0.8f64).ln()).abs() < 1e-12, "{a}");
    }

    #[test]
    fn too_short_head_is_rejected() {
        let ys = vec![1.0; 365 * 48];
        assert!(matches!(
            init_state(&ys, start(), &table(365, &[]), &SeedConfig::default()),
            Err(Error::InsufficientHistory(_))
        ));
    }

    fn seeded() -> (HwtState, Vec<f64>) {
        let n = 2 * 365 * 48;
        let ys: Vec<f64> = (0..n)
            .map(|t| 10.0 + 0.1 * ((t as f64) * 0.37).sin() + 0.2 * ((t % 48) as f64 / 48.0))
            .collect();
        (init_state(&ys, start(), &table(730, &[]), &SeedConfig::default()).unwrap(), ys)
    }

    #[test]
    fn zero_smoothing_changes_only_last_error() {
        let (mut st, ys) = seeded();
        let before = st.clone();
        let t = st.next_offset();
        let lag = 364 * 48;
        let step = filter_step(&mut st, &HwtParams::zero(), ys[t], false, lag).unwrap();
        let seed_sum = before.level
            + before.intraday[0]
            + before.intraweek[st.start.advance(t as i64).period_of_week() - 1]
            + before.intrayear[t - lag];
        assert!((step.prediction - seed_sum).abs() < 1e-15);
        assert_eq!(st.level, before.level);
        assert_eq!(st.intraday, before.intraday);
        assert_eq!(st.intraweek, before.intraweek);
        assert_eq!(st.intrayear[t], before.intrayear[t - lag]);
        assert_eq!(st.last_error, ys[t] - seed_sum);
    }

    #[test]
    fn special_step_freezes_intraday_and_intraweek() {
        let (mut st, ys) = seeded();
        let p = HwtParams { delta: 0.3, omega: 0.3, ..HwtParams::default() };
        let before = st.clone();
        let t = st.next_offset();
        filter_step(&mut st, &p, ys[t] + 0.5, true, 364 * 48).unwrap();
        assert_eq!(st.intraday, before.intraday);
        assert_eq!(st.intraweek, before.intraweek);
        assert_ne!(st.level, before.level);
    }

    #[test]
    fn residual_identity_holds_each_step() {
        let (mut st, ys) = seeded();
        let p = HwtParams { lambda: 0.2, delta: 0.1, omega: 0.15, alpha1: 0.3, alpha2: 0.4, phi: 0.5, ..HwtParams::default() };
        let lag = 364 * 48;
        for i in 0..2000 {
            let t = st.next_offset();
            let (d, w) = st.slots(t);
            let expect = ys[t] - (st.level + st.intraday[d] + st.intraweek[w] + st.intrayear[t - lag]);
            let step = filter_step(&mut st, &p, ys[t], i % 7 == 0, lag).unwrap();
            assert!((step.error - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn missing_annual_index() {
        let (mut st, ys) = seeded();
        let t = st.next_offset();
        let e = filter_step(&mut st, &HwtParams::default(), ys[t], false, t + 48).unwrap_err();
        assert!(matches!(e, Error::MissingAnnualIndex { .. }));
    }

    #[test]
    fn forecast_phi_terms() {
        let (mut st, ys) = seeded();
        let tb = table(730, &[]);
        let p = HwtParams { phi: 0.6, ..HwtParams::default() };
        let from = st.next_offset();
        for &y in &ys[from..from + 500] {
            filter_step(&mut st, &p, y, false, 364 * 48).unwrap();
        }
        let with = forecast(&st, &p, &tb, 48).unwrap();
        let without = forecast(&st, &HwtParams { phi: 0.0, ..p }, &tb, 48).unwrap();
        for (h, (a, b)) in with.iter().zip(&without).enumerate() {
            let expect = p.phi.powi(h as i32 + 1) * st.last_error;
            assert!((a - b - expect).abs() < 1e-12);
        }
        // h = 1 equals the prediction of the next filter step.
        let mut next = st.clone();
        let t = next.next_offset();
        let step = filter_step(&mut next, &p, ys[t], false, 364 * 48).unwrap();
        assert!((step.prediction - with[0]).abs() < 1e-12);
    }

    #[test]
    fn constant_series_is_a_fixed_point() {
        let n = 2 * 365 * 48;
        let ys = vec![7.5; n];
        let tb = table(730, &[]);
        let mut st = init_state(&ys, start(), &tb, &SeedConfig::default()).unwrap();
        let before = st.clone();
        let (errs, _) = run_filter(&mut st, &HwtParams::default(), &tb, &ys).unwrap();
        assert!(errs.iter().all(|e| e.abs() < 1e-12));
        assert_eq!(st.level, before.level);
        assert_eq!(st.intraday, before.intraday);
    }

    #[test]
    fn noiseless_periodic_series_forecasts_exactly() {
        let days = 3 * 364;
        let n = days * 48;
        let ys: Vec<f64> = (0..n)
            .map(|t| {
                let day = (t / 48) as f64;
                10.0 + 0.2 * ((t % 48) as f64 / 48.0 * std::f64::consts::TAU).sin()
                    + 0.05 * ((t % 336) as f64 / 336.0 * std::f64::consts::TAU).cos()
                    + 0.1 * (day / 364.0 * std::f64::consts::TAU).sin()
            })
            .collect();
        let tb = table(days, &[]);
        let seed = SeedConfig { intrayear_days: 364, ..SeedConfig::default() };
        let mut st = init_state(&ys, start(), &tb, &seed).unwrap();
        let p = HwtParams { lambda: 0.3, delta: 0.2, omega: 0.2, alpha1: 0.4, alpha2: 0.4, phi: 0.5, ..HwtParams::default() };
        let until = 2 * 364 * 48 + 17;
        run_filter(&mut st, &p, &tb, &ys[..until]).unwrap();
        let f = forecast(&st, &p, &tb, 48).unwrap();
        for (h, v) in f.iter().enumerate() {
            assert!((v - ys[until + h]).abs() < 1e-10, "h={} {}", h + 1, v - ys[until + h]);
        }
    }
}
