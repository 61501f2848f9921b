//! Intraweek SVD-based exponential smoothing with rule-based intrayear lags
//! (RB-SVD).
//!
//! Complete normal weeks of centred log-load form a weeks × 336 matrix whose
//! leading right singular vectors span the intraweek shapes. The state is a
//! length-k coefficient vector on that basis plus an intrayear index kept
//! exactly as in the HWT model. The level, intraday and intraweek directions
//! of the coefficient update are the basis images of a constant week, of the
//! seven same-period-of-day slots, and of the current slot.

use std::io::Write;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{fit_transformed, FitResult, MinimizeOptions, Transform, VARIANCE_FLOOR};
use crate::hwt::{usable_lag, HwtParams, SeedConfig};
use crate::model::Forecaster;
use crate::rules::AnnualLagTable;
use crate::series::{PeriodStamp, PERIODS_PER_DAY, PERIODS_PER_WEEK};

/// Default candidate dimensions for cross-validation.
pub const DEFAULT_K_GRID: [usize; 6] = [5, 10, 20, 29, 40, 60];

/// Complete normal weeks, Monday period 1 first, with the overall mean
/// removed.
#[derive(Debug, Clone, PartialEq)]
pub struct WeekMatrix {
    pub rows: DMatrix<f64>,
    pub mean: f64,
    /// Series offset of each row's first period.
    pub week_offsets: Vec<usize>,
}

/// Offsets of complete weeks in `[0, len)` with no special day.
fn normal_week_offsets(start: PeriodStamp, table: &AnnualLagTable, len: usize) -> Vec<usize> {
    let first = (0..PERIODS_PER_WEEK.min(len))
        .find(|&t| start.advance(t as i64).period_of_week() == 1)
        .unwrap_or(len);
    (first..)
        .step_by(PERIODS_PER_WEEK)
        .take_while(|o| o + PERIODS_PER_WEEK <= len)
        .filter(|o| (0..7).all(|d| !table.is_special_at(o + d * PERIODS_PER_DAY)))
        .collect()
}

impl WeekMatrix {
    pub fn from_series(ys_log: &[f64], start: PeriodStamp, table: &AnnualLagTable) -> Result<Self> {
        let offsets = normal_week_offsets(start, table, ys_log.len());
        Self::from_offsets(ys_log, offsets)
    }

    fn from_offsets(ys_log: &[f64], offsets: Vec<usize>) -> Result<Self> {
        if offsets.len() < 2 {
            return Err(Error::InsufficientHistory(format!(
                "SVD needs at least 2 complete normal weeks, found {}",
                offsets.len()
            )));
        }
        let mean = offsets
            .iter()
            .flat_map(|&o| &ys_log[o..o + PERIODS_PER_WEEK])
            .sum::<f64>()
            / (offsets.len() * PERIODS_PER_WEEK) as f64;
        let rows = DMatrix::from_fn(offsets.len(), PERIODS_PER_WEEK, |r, c| ys_log[offsets[r] + c] - mean);
        Ok(Self { rows, mean, week_offsets: offsets })
    }
}

/// Full decomposition `Y = U S V'` with singular values in decreasing order.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub u: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    /// 336 × r with orthonormal columns, r = min(weeks, 336).
    pub v: DMatrix<f64>,
}

impl Decomposition {
    pub fn new(y: &DMatrix<f64>) -> Self {
        let svd = y.clone().svd(true, true);
        let u = svd.u.expect("left vectors requested");
        let vt = svd.v_t.expect("right vectors requested");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        Self {
            u: DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]),
            singular_values: order.iter().map(|&i| svd.singular_values[i]).collect(),
            v: DMatrix::from_fn(vt.ncols(), order.len(), |r, c| vt[(order[c], r)]),
        }
    }

    /// Rank of the decomposition.
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.u * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.singular_values.clone())) * self.v.transpose()
    }

    /// Writes `component,singular_value,explained,cumulative`, where the
    /// shares are of the total squared singular values.
    pub fn write_scree_csv<W: Write>(&self, writer: W) -> Result<()> {
        let total: f64 = self.singular_values.iter().map(|s| s * s).sum();
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["component", "singular_value", "explained", "cumulative"])?;
        let mut cum = 0.0;
        for (i, s) in self.singular_values.iter().enumerate() {
            let share = if total > 0.0 { s * s / total } else { 0.0 };
            cum += share;
            w.write_record([(i + 1).to_string(), s.to_string(), share.to_string(), cum.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// First `k` intraweek feature vectors with the derived update directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvdBasis {
    pub k: usize,
    /// Added back to every prediction.
    pub mean: f64,
    pub singular_values: Vec<f64>,
    /// 336 rows of length k, Monday period 1 first.
    pub rows: Vec<Vec<f64>>,
    /// Basis image of a constant week.
    pub level_direction: Vec<f64>,
    /// Per period of day, the sum of the seven matching rows.
    pub intraday_directions: Vec<Vec<f64>>,
}

impl SvdBasis {
    pub fn new(dec: &Decomposition, mean: f64, k: usize) -> Result<Self> {
        if k == 0 || k > dec.rank() {
            return Err(Error::ConfigInvalid(format!("SVD dimension {k} outside 1..={}", dec.rank())));
        }
        let rows: Vec<Vec<f64>> = (0..PERIODS_PER_WEEK).map(|s| (0..k).map(|j| dec.v[(s, j)]).collect()).collect();
        let level_direction = (0..k).map(|j| rows.iter().map(|r| r[j]).sum()).collect();
        let intraday_directions = (0..PERIODS_PER_DAY)
            .map(|u| (0..k).map(|j| (0..7).map(|d| rows[u + d * PERIODS_PER_DAY][j]).sum()).collect())
            .collect();
        Ok(Self {
            k,
            mean,
            singular_values: dec.singular_values[..k].to_vec(),
            rows,
            level_direction,
            intraday_directions,
        })
    }

    /// Decomposes the normal weeks of `ys_log` and keeps `k` vectors.
    pub fn from_series(ys_log: &[f64], start: PeriodStamp, table: &AnnualLagTable, k: usize) -> Result<Self> {
        let wm = WeekMatrix::from_series(ys_log, start, table)?;
        Self::new(&Decomposition::new(&wm.rows), wm.mean, k)
    }

    fn project(&self, week: &[f64]) -> Vec<f64> {
        (0..self.k)
            .map(|j| week.iter().zip(&self.rows).map(|(y, r)| (y - self.mean) * r[j]).sum())
            .collect()
    }

    fn shape(&self, coeffs: &[f64], s: usize) -> f64 {
        self.mean + dot(coeffs, &self.rows[s])
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvdState {
    /// Coefficients of the current week on the basis.
    pub coeffs: Vec<f64>,
    /// By series offset; one entry per seeded or absorbed observation.
    pub intrayear: Vec<f64>,
    pub last_error: f64,
    pub start: PeriodStamp,
}

impl SvdState {
    pub fn next_offset(&self) -> usize {
        self.intrayear.len()
    }

    fn slots(&self, offset: usize) -> (usize, usize) {
        let s = self.start.advance(offset as i64);
        (s.period as usize - 1, s.period_of_week() - 1)
    }
}

/// Seeds the coefficients with the projection of the mean normal week of the
/// seed span, and the intrayear index with the seed-span residuals.
pub fn init_state(
    head_log: &[f64],
    start: PeriodStamp,
    table: &AnnualLagTable,
    basis: &SvdBasis,
    seed: &SeedConfig,
) -> Result<SvdState> {
    let seed_len = seed.seed_len();
    if head_log.len() < 2 * seed_len {
        return Err(Error::InsufficientHistory(format!(
            "seeding needs {} observations, have {}",
            2 * seed_len,
            head_log.len()
        )));
    }
    let offsets = normal_week_offsets(start, table, seed_len);
    if offsets.is_empty() {
        return Err(Error::InsufficientHistory("no complete normal week in the seed span".into()));
    }
    let mut mean_week = vec![0.0; PERIODS_PER_WEEK];
    for &o in &offsets {
        for (m, y) in mean_week.iter_mut().zip(&head_log[o..o + PERIODS_PER_WEEK]) {
            *m += y / offsets.len() as f64;
        }
    }
    let coeffs = basis.project(&mean_week);
    let mut state = SvdState { coeffs, intrayear: Vec::with_capacity(head_log.len()), last_error: 0.0, start };
    for (t, y) in head_log.iter().enumerate().take(seed_len) {
        let (_, s) = state.slots(t);
        state.intrayear.push(y - basis.shape(&state.coeffs, s));
    }
    Ok(state)
}

/// Result of absorbing one observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub error: f64,
    pub prediction: f64,
}

/// Absorbs `y` at the state's next offset. `params.lambda`, `delta` and
/// `omega` weight the level, intraday and intraweek update directions.
pub fn filter_step(
    state: &mut SvdState,
    basis: &SvdBasis,
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
    let (u, s) = state.slots(t);
    let mean = basis.shape(&state.coeffs, s) + a_prev;
    let prediction = mean + params.phi * state.last_error;
    let e = y - mean;
    let row = &basis.rows[s];
    let day = &basis.intraday_directions[u];
    for j in 0..basis.k {
        let mut g = params.lambda * basis.level_direction[j];
        if !is_special {
            g += params.delta * day[j] + params.omega * row[j];
        }
        state.coeffs[j] += g * e;
    }
    let alpha = if is_special { params.alpha2 } else { params.alpha1 };
    state.intrayear.push(a_prev + alpha * e);
    state.last_error = e;
    Ok(Step { error: e, prediction })
}

pub fn forecast(
    state: &SvdState,
    basis: &SvdBasis,
    params: &HwtParams,
    table: &AnnualLagTable,
    horizon: usize,
) -> Result<Vec<f64>> {
    let n = state.next_offset();
    let mut phi_h = 1.0;
    (1..=horizon)
        .map(|h| {
            phi_h *= params.phi;
            let t = n + h - 1;
            let (lag, _) = usable_lag(table, t).ok_or(Error::MissingAnnualIndex { offset: t, lag: table.lag_at(t) })?;
            let idx = t - lag;
            if idx >= n {
                return Err(Error::MissingAnnualIndex { offset: t, lag });
            }
            let (_, s) = state.slots(t);
            Ok(basis.shape(&state.coeffs, s) + state.intrayear[idx] + phi_h * state.last_error)
        })
        .collect()
}

/// Runs the filter over `ys[state.next_offset()..]`, returning one-step
/// prediction errors and whether each period's table lag was usable.
pub fn run_filter(
    state: &mut SvdState,
    basis: &SvdBasis,
    params: &HwtParams,
    table: &AnnualLagTable,
    ys: &[f64],
) -> Result<(Vec<f64>, Vec<bool>)> {
    let from = state.next_offset();
    let mut errs = Vec::with_capacity(ys.len().saturating_sub(from));
    let mut usable = Vec::with_capacity(errs.capacity());
    for (i, &y) in ys.iter().enumerate().skip(from) {
        let (lag, ok) = usable_lag(table, i).ok_or(Error::MissingAnnualIndex { offset: i, lag: table.lag_at(i) })?;
        let step = filter_step(state, basis, params, y, table.is_special_at(i), lag)?;
        errs.push(y - step.prediction);
        usable.push(ok);
    }
    Ok((errs, usable))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvdFitConfig {
    pub k: usize,
    pub seed: SeedConfig,
    pub start: HwtParams,
    pub optimizer: MinimizeOptions,
}

impl Default for SvdFitConfig {
    fn default() -> Self {
        Self { k: 29, seed: SeedConfig::default(), start: HwtParams::default(), optimizer: MinimizeOptions::default() }
    }
}

fn objective(seeded: &SvdState, basis: &SvdBasis, params: &HwtParams, table: &AnnualLagTable, ys: &[f64]) -> (f64, f64, f64) {
    let mut state = seeded.clone();
    state.intrayear.reserve(ys.len());
    let (mut ss_n, mut ss_s, mut n_n, mut n_s) = (0.0, 0.0, 0usize, 0usize);
    for (i, &y) in ys.iter().enumerate().skip(seeded.next_offset()) {
        let Some((lag, ok)) = usable_lag(table, i) else {
            return (f64::INFINITY, f64::NAN, f64::NAN);
        };
        let special = table.is_special_at(i);
        let Ok(step) = filter_step(&mut state, basis, params, y, special, lag) else {
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

/// Builds the basis from the estimation sample and fits the smoothing
/// parameters by maximum likelihood.
pub fn fit(
    ys: &[f64],
    start: PeriodStamp,
    table: &AnnualLagTable,
    cfg: &SvdFitConfig,
) -> Result<(SvdBasis, HwtParams, SvdState, FitResult)> {
    let basis = SvdBasis::from_series(ys, start, table, cfg.k)?;
    let seeded = init_state(ys, start, table, &basis, &cfg.seed)?;
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
        let (a2, phi) = if rb { (v[4], v[5]) } else { (v[3], v[4]) };
        HwtParams { lambda: v[0], delta: v[1], omega: v[2], alpha1: v[3], alpha2: a2, phi, sigma_n2: 1.0, sigma_s2: 1.0 }
    };
    let (best, res) = fit_transformed(&transforms, &start_vec, &cfg.optimizer, |v| {
        objective(&seeded, &basis, &unpack(v), table, ys).0
    });
    let mut params = unpack(&best);
    let (nll, vn, vs) = objective(&seeded, &basis, &params, table, ys);
    params.sigma_n2 = vn;
    params.sigma_s2 = if vs.is_nan() { vn } else { vs };
    if !res.converged {
        log::warn!("SVD fit did not converge after {} evaluations", res.evals);
    }
    let fit = FitResult {
        params: best,
        nll,
        evaluations: res.evals,
        converged: res.converged,
        sigma_n2: params.sigma_n2,
        sigma_s2: params.sigma_s2,
    };
    Ok((basis, params, seeded, fit))
}

/// Picks the dimension with the lowest one-step MAPE over the final
/// `holdout` periods of `ys`, refitting on the rest for each candidate.
/// Ties go to the smaller dimension. Returns the choice and every score.
pub fn select_k(
    ys: &[f64],
    start: PeriodStamp,
    table: &AnnualLagTable,
    candidates: &[usize],
    holdout: usize,
    cfg: &SvdFitConfig,
) -> Result<(usize, Vec<(usize, f64)>)> {
    if candidates.is_empty() {
        return Err(Error::ConfigInvalid("empty SVD dimension grid".into()));
    }
    if holdout == 0 || holdout >= ys.len() {
        return Err(Error::SeriesTooShort { needed: holdout + 1, have: ys.len() });
    }
    let train = &ys[..ys.len() - holdout];
    let mut scores = Vec::new();
    let mut sorted = candidates.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    for k in sorted {
        let (basis, params, mut state, _) = match fit(train, start, table, &SvdFitConfig { k, ..*cfg }) {
            Ok(f) => f,
            Err(Error::ConfigInvalid(m)) => {
                log::warn!("skipping SVD dimension {k}: {m}");
                continue;
            }
            Err(e) => return Err(e),
        };
        run_filter(&mut state, &basis, &params, table, train)?;
        let (errs, _) = run_filter(&mut state, &basis, &params, table, ys)?;
        let from = ys.len() - holdout;
        let mape = errs
            .iter()
            .zip(&ys[from..])
            .map(|(e, y)| {
                let pred = y - e;
                ((y.exp() - pred.exp()) / y.exp()).abs()
            })
            .sum::<f64>()
            / holdout as f64;
        scores.push((k, mape));
    }
    let best = scores
        .iter()
        .copied()
        .reduce(|a, b| if b.1 < a.1 { b } else { a })
        .ok_or_else(|| Error::ConfigInvalid("no SVD dimension could be fitted".into()))?;
    Ok((best.0, scores))
}

/// A fitted RB-SVD model driven observation by observation.
#[derive(Debug, Clone)]
pub struct SvdModel {
    name: String,
    pub basis: Arc<SvdBasis>,
    pub params: HwtParams,
    pub state: SvdState,
    table: Arc<AnnualLagTable>,
}

impl SvdModel {
    pub fn new(name: impl Into<String>, basis: Arc<SvdBasis>, params: HwtParams, state: SvdState, table: Arc<AnnualLagTable>) -> Self {
        Self { name: name.into(), basis, params, state, table }
    }
}

impl Forecaster for SvdModel {
    fn name(&self) -> &str {
        &self.name
    }

    fn observed(&self) -> usize {
        self.state.next_offset()
    }

    fn observe(&mut self, y_log: f64) -> Result<()> {
        let t = self.state.next_offset();
        let (lag, _) = usable_lag(&self.table, t).ok_or(Error::MissingAnnualIndex { offset: t, lag: self.table.lag_at(t) })?;
        filter_step(&mut self.state, &self.basis, &self.params, y_log, self.table.is_special_at(t), lag)?;
        Ok(())
    }

    fn forecast(&self, horizon: usize) -> Result<Vec<Option<f64>>> {
        Ok(forecast(&self.state, &self.basis, &self.params, &self.table, horizon)?
            .into_iter()
            .map(Some)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn start() -> PeriodStamp {
        PeriodStamp::new(NaiveDate::from_ymd_opt(2001, 1, 1).unwrap(), 1)
    }

    fn random_matrix(r: usize, c: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(r, c, |_, _| rng.random::<f64>() - 0.5)
    }

    fn frob(m: &DMatrix<f64>) -> f64 {
        m.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    #[test]
    fn reconstruction_and_orthonormality() {
        let y = random_matrix(400, 336, 1);
        let d = Decomposition::new(&y);
        assert_eq!(d.rank(), 336);
        assert!(frob(&(d.reconstruct() - &y)) / frob(&y) < 1e-8);
        let vtv = d.v.transpose() * &d.v;
        assert!(frob(&(vtv - DMatrix::identity(336, 336))) < 1e-8);
        assert!(d.singular_values.windows(2).all(|w| w[0] >= w[1]));
        // P = YV reconstructs Y through P V'.
        let p = &y * &d.v;
        assert!(frob(&(p * d.v.transpose() - &y)) / frob(&y) < 1e-8);
    }

    #[test]
    fn rank_one_matrix() {
        let a = random_matrix(50, 1, 2);
        let b = random_matrix(1, 336, 3);
        let d = Decomposition::new(&(&a * &b));
        assert!(d.singular_values[1..].iter().all(|s| *s < 1e-10 * d.singular_values[0]));
    }

    #[test]
    fn orthogonal_matrix_has_equal_singular_values() {
        let q = random_matrix(336, 336, 4).qr().q();
        let d = Decomposition::new(&q);
        assert!(d.singular_values.iter().all(|s| (s - 1.0).abs() < 1e-10));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]
        #[test]
        fn projection_error_non_increasing_in_k(seed in 0u64..1000) {
            let y = random_matrix(60, 336, seed);
            let d = Decomposition::new(&y);
            let week: Vec<f64> = random_matrix(1, 336, seed + 1).iter().copied().collect();
            let mut last = f64::INFINITY;
            for k in [1, 5, 10, 30, 60] {
                let b = SvdBasis::new(&d, 0.0, k).unwrap();
                let c = b.project(&week);
                let err: f64 = (0..336).map(|s| (week[s] - b.shape(&c, s)).powi(2)).sum();
                prop_assert!(err <= last + 1e-9);
                last = err;
            }
        }
    }

    fn table(days: usize) -> AnnualLagTable {
        AnnualLagTable::constant(start(), days, 364, &[])
    }

    /// Two years and a bit of an exactly week-periodic series.
    fn weekly_series(days: usize) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let week: Vec<f64> = (0..336).map(|s| 10.0 + 0.2 * ((s % 48) as f64 / 7.6).sin() + 0.02 * (rng.random::<f64>() - 0.5)).collect();
        ((0..days * 48).map(|t| week[t % 336]).collect(), week)
    }

    #[test]
    fn full_rank_reproduces_weekly_series() {
        let days = 2 * 364 + 14;
        let (ys, _) = weekly_series(days);
        let tb = table(days);
        // Any full-rank basis spans every week shape.
        let wm = WeekMatrix::from_series(&ys, start(), &tb).unwrap();
        let basis = SvdBasis::new(&Decomposition::new(&random_matrix(400, 336, 6)), wm.mean, 336).unwrap();
        let seed = SeedConfig { intrayear_days: 364, ..SeedConfig::default() };
        let mut st = init_state(&ys, start(), &tb, &basis, &seed).unwrap();
        let p = HwtParams { lambda: 0.01, delta: 0.01, omega: 0.02, alpha1: 0.1, alpha2: 0.1, phi: 0.4, ..HwtParams::default() };
        let (errs, _) = run_filter(&mut st, &basis, &p, &tb, &ys[..ys.len() - 48]).unwrap();
        assert!(errs.iter().all(|e| e.abs() < 1e-9), "{:?}", errs.iter().fold(0.0f64, |m, e| m.max(e.abs())));
        let f = forecast(&st, &basis, &p, &tb, 48).unwrap();
        for (h, v) in f.iter().enumerate() {
            assert!((v - ys[ys.len() - 48 + h]).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_smoothing_keeps_coefficients() {
        let days = 2 * 365;
        let (ys, _) = weekly_series(days);
        let tb = table(days);
        let basis = SvdBasis::from_series(&ys, start(), &tb, 5).unwrap();
        let mut st = init_state(&ys, start(), &tb, &basis, &SeedConfig::default()).unwrap();
        let before = st.coeffs.clone();
        run_filter(&mut st, &basis, &HwtParams::zero(), &tb, &ys[..365 * 48 + 500]).unwrap();
        assert_eq!(st.coeffs, before);
    }

    #[test]
    fn special_step_uses_only_level_direction() {
        let days = 2 * 365;
        let (ys, _) = weekly_series(days);
        let tb = table(days);
        let basis = SvdBasis::from_series(&ys, start(), &tb, 5).unwrap();
        let mut st = init_state(&ys, start(), &tb, &basis, &SeedConfig::default()).unwrap();
        let p = HwtParams { lambda: 0.1, delta: 0.3, omega: 0.3, alpha1: 0.2, alpha2: 0.7, phi: 0.0, ..HwtParams::default() };
        let before = st.clone();
        let t = st.next_offset();
        let step = filter_step(&mut st, &basis, &p, ys[t] + 0.1, true, 364 * 48).unwrap();
        for j in 0..5 {
            let expect = before.coeffs[j] + 0.1 * basis.level_direction[j] * step.error;
            assert!((st.coeffs[j] - expect).abs() < 1e-14);
        }
        assert!((st.intrayear[t] - (before.intrayear[t - 364 * 48] + 0.7 * step.error)).abs() < 1e-14);
    }

    #[test]
    fn residual_identity_from_state() {
        let days = 2 * 365;
        let (ys, _) = weekly_series(days);
        let ys: Vec<f64> = ys.iter().enumerate().map(|(i, y)| y + 0.01 * (i as f64 * 0.3).sin()).collect();
        let tb = table(days);
        let basis = SvdBasis::from_series(&ys, start(), &tb, 8).unwrap();
        let mut st = init_state(&ys, start(), &tb, &basis, &SeedConfig::default()).unwrap();
        let p = HwtParams { lambda: 0.05, delta: 0.02, omega: 0.1, alpha1: 0.2, alpha2: 0.2, phi: 0.5, ..HwtParams::default() };
        for _ in 0..3000 {
            let t = st.next_offset();
            let (_, s) = st.slots(t);
            let expect = ys[t] - (basis.mean + dot(&st.coeffs, &basis.rows[s]) + st.intrayear[t - 364 * 48]);
            let step = filter_step(&mut st, &basis, &p, ys[t], false, 364 * 48).unwrap();
            assert!((step.error - expect).abs() < 1e-13);
        }
        // h = 1 forecast equals the next prediction.
        let f = forecast(&st, &basis, &p, &tb, 1).unwrap()[0];
        let t = st.next_offset();
        let step = filter_step(&mut st.clone(), &basis, &p, ys[t], false, 364 * 48).unwrap();
        assert!((f - step.prediction).abs() < 1e-13);
    }

    #[test]
    fn too_few_weeks() {
        let ys = vec![1.0; 336 + 10];
        assert!(matches!(WeekMatrix::from_series(&ys, start(), &table(10)), Err(Error::InsufficientHistory(_))));
    }

    #[test]
    fn select_k_on_low_rank_weeks() {
        // Rank-3 weekly structure scaled week by week, plus small noise.
        let days = 3 * 364;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let shapes: Vec<Vec<f64>> = (0..3).map(|_| (0..336).map(|_| rng.random::<f64>() - 0.5).collect()).collect();
        let weeks = days / 7;
        let w: Vec<[f64; 3]> = (0..weeks).map(|i| [1.0, 0.3 * (i as f64 / 9.0).sin(), 0.2 * (i as f64 / 5.0).cos()]).collect();
        let ys: Vec<f64> = (0..days * 48)
            .map(|t| {
                let (wk, s) = (t / 336, t % 336);
                10.0 + 0.1 * (0..3).map(|j| w[wk][j] * shapes[j][s]).sum::<f64>() + 0.001 * (rng.random::<f64>() - 0.5)
            })
            .collect();
        let tb = table(days);
        let cfg = SvdFitConfig {
            seed: SeedConfig { intrayear_days: 364, ..SeedConfig::default() },
            optimizer: MinimizeOptions { max_evals: 300, restarts: 0, ..MinimizeOptions::default() },
            ..SvdFitConfig::default()
        };
        let (k, scores) = select_k(&ys, start(), &tb, &[3, 5, 20, 60], 364 * 48 / 4, &cfg).unwrap();
        assert!(k <= 5, "{scores:?}");
        let (k1, _) = select_k(&ys, start(), &tb, &[7], 1000, &cfg).unwrap();
        assert_eq!(k1, 7);
    }

    #[test]
    fn scree_csv_rows() {
        let d = Decomposition::new(&random_matrix(40, 336, 9));
        let mut buf = Vec::new();
        d.write_scree_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 41);
        let last: f64 = text.lines().last().unwrap().split(',').nth(3).unwrap().parse().unwrap();
        assert!((last - 1.0).abs() < 1e-9);
    }
}
