//! Rule-based feedforward networks over doubly differenced log-load (RB-ANN).
//!
//! One network per horizon. Inputs are differenced load at the forecast
//! origin, two periods before it, the matching period one to three days and
//! one to three weeks before the target, and the three nested rule-based
//! annual counterparts of the target. The optional calendar variant appends
//! day-of-year, day-of-week, period-of-week and period-of-day counters with
//! their sine and cosine, and the normal-day indicator of the target.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::io::{Read, Write};
use std::sync::Arc;

use chrono::Datelike;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Forecaster;
use crate::rules::AnnualLagTable;
use crate::series::{PeriodStamp, PERIODS_PER_DAY, PERIODS_PER_WEEK};

/// Periods lost at the head of the differenced series.
pub const DIFF_SPAN: usize = PERIODS_PER_DAY + PERIODS_PER_WEEK;
/// Trained horizons for desk-scale runs.
pub const DESK_HORIZONS: [usize; 5] = [1, 6, 12, 24, 48];
pub const MAX_HORIZON: usize = PERIODS_PER_DAY;
/// Number of calendar inputs appended by the calendar variant.
pub const CALENDAR_FEATURES: usize = 13;
const FORMAT_VERSION: u32 = 1;

/// `z_t = y_t − y_{t−48} − y_{t−336} + y_{t−384}`; the first 384 entries
/// are NaN.
pub fn difference(ys_log: &[f64]) -> Result<Vec<f64>> {
    if ys_log.len() <= DIFF_SPAN {
        return Err(Error::SeriesTooShort { needed: DIFF_SPAN, have: ys_log.len() });
    }
    Ok((0..ys_log.len()).map(|t| differenced_at(ys_log, t)).collect())
}

fn differenced_at(ys: &[f64], t: usize) -> f64 {
    if t < DIFF_SPAN {
        return f64::NAN;
    }
    ys[t] - ys[t - PERIODS_PER_DAY] - ys[t - PERIODS_PER_WEEK] + ys[t - DIFF_SPAN]
}

/// The part of `y_t` known from earlier observations.
fn seasonal_base(ys: &[f64], t: usize) -> f64 {
    ys[t - PERIODS_PER_DAY] + ys[t - PERIODS_PER_WEEK] - ys[t - DIFF_SPAN]
}

/// Rebuilds a series from its first 384 values and the differences after.
pub fn undifference(head: &[f64], z: &[f64]) -> Result<Vec<f64>> {
    if head.len() != DIFF_SPAN || z.len() < DIFF_SPAN {
        return Err(Error::SeriesTooShort { needed: DIFF_SPAN, have: head.len().min(z.len()) });
    }
    let mut ys = head.to_vec();
    for &zt in &z[DIFF_SPAN..] {
        let t = ys.len();
        ys.push(zt + seasonal_base(&ys, t));
    }
    Ok(ys)
}

/// Offsets of the load inputs for `target` at horizon `h`, in listing order
/// with repeats removed.
pub fn lag_positions(target: usize, h: usize, table: &AnnualLagTable) -> Result<Vec<usize>> {
    if h == 0 || h > MAX_HORIZON {
        return Err(Error::ConfigInvalid(format!("horizon {h} outside 1..={MAX_HORIZON}")));
    }
    let short = [h, h + 1, h + 2];
    let seasonal = [1, 2, 3].map(|j| j * PERIODS_PER_DAY).into_iter().chain([1, 2, 3].map(|j| j * PERIODS_PER_WEEK));
    let mut lags: Vec<usize> = short.into_iter().chain(seasonal).collect();
    for (i, l) in table.nested_lags(target).into_iter().enumerate() {
        lags.push(l.ok_or(Error::MissingAnnualIndex { offset: target, lag: i + 1 })?);
    }
    let mut out = Vec::with_capacity(lags.len());
    for lag in lags {
        let pos = target.checked_sub(lag).filter(|p| *p >= DIFF_SPAN).ok_or(Error::SeriesTooShort {
            needed: lag + DIFF_SPAN,
            have: target,
        })?;
        if !out.contains(&pos) {
            out.push(pos);
        }
    }
    Ok(out)
}

/// Calendar inputs of a period: four counters, the sine and cosine of each
/// over its cycle, and the normal-day indicator.
pub fn calendar_features(stamp: PeriodStamp, is_special: bool) -> [f64; CALENDAR_FEATURES] {
    let counters = [
        (stamp.date.ordinal() as f64, 366.0),
        (stamp.date.weekday().number_from_monday() as f64, 7.0),
        (stamp.period_of_week() as f64, PERIODS_PER_WEEK as f64),
        (stamp.period as f64, PERIODS_PER_DAY as f64),
    ];
    let mut out = [0.0; CALENDAR_FEATURES];
    for (i, (c, period)) in counters.iter().enumerate() {
        out[i] = *c;
        out[4 + 2 * i] = (TAU * c / period).sin();
        out[5 + 2 * i] = (TAU * c / period).cos();
    }
    out[12] = if is_special { 0.0 } else { 1.0 };
    out
}

/// Raw (unnormalized) input vector for `target` at horizon `h`.
pub fn build_features(
    target: usize,
    h: usize,
    table: &AnnualLagTable,
    z: &[f64],
    start: PeriodStamp,
    calendar_inputs: bool,
) -> Result<Vec<f64>> {
    let positions = lag_positions(target, h, table)?;
    let mut out = Vec::with_capacity(positions.len() + CALENDAR_FEATURES);
    for p in positions {
        let v = *z.get(p).ok_or(Error::SeriesTooShort { needed: p + 1, have: z.len() })?;
        out.push(v);
    }
    if calendar_inputs {
        out.extend(calendar_features(start.advance(target as i64), table.is_special_at(target)));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnConfig {
    pub horizon: usize,
    pub hidden_units: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub l2_regularization: f64,
    pub epochs: usize,
    /// Epochs without hold-out improvement before stopping.
    pub patience: usize,
    /// Examples per update; 0 means the whole training set.
    pub batch_size: usize,
    pub calendar_inputs: bool,
    pub seed: u64,
}

impl Default for AnnConfig {
    fn default() -> Self {
        Self {
            horizon: 1,
            hidden_units: 10,
            learning_rate: 0.01,
            momentum: 0.9,
            l2_regularization: 1e-4,
            epochs: 200,
            patience: 20,
            batch_size: 32,
            calendar_inputs: false,
            seed: 1,
        }
    }
}

impl AnnConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::ConfigInvalid(m.into()));
        if self.horizon == 0 || self.horizon > MAX_HORIZON {
            return bad("horizon outside 1..=48");
        }
        if self.hidden_units == 0 {
            return bad("hidden_units must be positive");
        }
        for (name, v) in [("learning_rate", self.learning_rate), ("momentum", self.momentum), ("l2_regularization", self.l2_regularization)] {
            if !v.is_finite() || v < 0.0 {
                return bad(&format!("{name} must be a non-negative real"));
            }
        }
        if self.momentum >= 1.0 {
            return bad("momentum must be below 1");
        }
        Ok(())
    }
}

/// Candidate values searched by [`select_hyperparams`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnGrid {
    pub hidden_units: Vec<usize>,
    pub learning_rates: Vec<f64>,
    pub momenta: Vec<f64>,
    pub l2: Vec<f64>,
}

impl Default for AnnGrid {
    fn default() -> Self {
        Self { hidden_units: vec![5, 10, 20], learning_rates: vec![0.01, 0.001], momenta: vec![0.0, 0.9], l2: vec![0.0, 1e-4] }
    }
}

impl AnnGrid {
    pub fn configs(&self, base: &AnnConfig) -> Vec<AnnConfig> {
        let mut out = Vec::new();
        for &hidden_units in &self.hidden_units {
            for &learning_rate in &self.learning_rates {
                for &momentum in &self.momenta {
                    for &l2_regularization in &self.l2 {
                        out.push(AnnConfig { hidden_units, learning_rate, momentum, l2_regularization, ..*base });
                    }
                }
            }
        }
        out
    }
}

/// Row-major examples.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub n_features: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Dataset {
    pub fn new(n_features: usize) -> Self {
        Self { n_features, ..Self::default() }
    }

    pub fn push(&mut self, features: &[f64], target: f64) {
        debug_assert_eq!(features.len(), self.n_features);
        self.x.extend_from_slice(features);
        self.y.push(target);
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.n_features..(i + 1) * self.n_features]
    }
}

/// Training and hold-out examples for one horizon. Targets run over
/// `[DIFF_SPAN, len)` where every input resolves; those at or after
/// `holdout_from` form the hold-out set.
pub fn build_datasets(
    ys_log: &[f64],
    start: PeriodStamp,
    table: &AnnualLagTable,
    h: usize,
    calendar_inputs: bool,
    holdout_from: usize,
) -> Result<(Dataset, Dataset)> {
    let z = difference(ys_log)?;
    let mut train: Option<Dataset> = None;
    let mut hold: Option<Dataset> = None;
    for t in DIFF_SPAN..ys_log.len() {
        let Ok(f) = build_features(t, h, table, &z, start, calendar_inputs) else {
            continue;
        };
        let set = if t >= holdout_from { &mut hold } else { &mut train };
        let set = set.get_or_insert_with(|| Dataset::new(f.len()));
        if set.n_features != f.len() {
            return Err(Error::ConfigInvalid(format!("input count changed at offset {t}")));
        }
        set.push(&f, z[t]);
    }
    match (train, hold) {
        (Some(a), Some(b)) if a.n_features == b.n_features => Ok((a, b)),
        (a, b) => Err(Error::InsufficientHistory(format!(
            "horizon {h}: {} training and {} hold-out examples",
            a.map_or(0, |d| d.len()),
            b.map_or(0, |d| d.len())
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub mean: f64,
    /// Always positive.
    pub sd: f64,
}

impl Normalizer {
    pub const IDENTITY: Self = Self { mean: 0.0, sd: 1.0 };

    fn fit(values: impl Iterator<Item = f64>) -> Self {
        let v: Vec<f64> = values.collect();
        if v.is_empty() {
            return Self::IDENTITY;
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
        Self { mean, sd: if sd > 1e-12 && sd.is_finite() { sd } else { 1.0 } }
    }

    pub fn apply(&self, v: f64) -> f64 {
        (v - self.mean) / self.sd
    }

    pub fn invert(&self, v: f64) -> f64 {
        v * self.sd + self.mean
    }
}

/// Single hidden layer of sigmoid units and one linear output. Parameters
/// are flat: input weights by hidden unit, hidden biases, output weights,
/// output bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub n_in: usize,
    pub n_hidden: usize,
    pub params: Vec<f64>,
}

fn sigmoid(a: f64) -> f64 {
    1.0 / (1.0 + (-a).exp())
}

impl Mlp {
    pub fn param_count(n_in: usize, n_hidden: usize) -> usize {
        n_hidden * (n_in + 2) + 1
    }

    /// Weights uniform in ±1/√fan-in.
    pub fn init(n_in: usize, n_hidden: usize, rng: &mut impl Rng) -> Self {
        let mut params = Vec::with_capacity(Self::param_count(n_in, n_hidden));
        let r1 = 1.0 / (n_in as f64).sqrt();
        let r2 = 1.0 / (n_hidden as f64).sqrt();
        params.extend((0..n_hidden * (n_in + 1)).map(|_| rng.random_range(-r1..=r1)));
        params.extend((0..=n_hidden).map(|_| rng.random_range(-r2..=r2)));
        Self { n_in, n_hidden, params }
    }

    pub fn zeros(n_in: usize, n_hidden: usize) -> Self {
        Self { n_in, n_hidden, params: vec![0.0; Self::param_count(n_in, n_hidden)] }
    }

    fn b1_at(&self) -> usize {
        self.n_hidden * self.n_in
    }

    fn w2_at(&self) -> usize {
        self.n_hidden * (self.n_in + 1)
    }

    fn is_weight(&self, i: usize) -> bool {
        i < self.b1_at() || (i >= self.w2_at() && i < self.params.len() - 1)
    }

    pub fn forward(&self, x: &[f64]) -> f64 {
        let (b1, w2) = (self.b1_at(), self.w2_at());
        let mut out = self.params[self.params.len() - 1];
        for j in 0..self.n_hidden {
            let w = &self.params[j * self.n_in..(j + 1) * self.n_in];
            let a = self.params[b1 + j] + w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>();
            out += self.params[w2 + j] * sigmoid(a);
        }
        out
    }

    fn l2_penalty(&self, l2: f64) -> f64 {
        l2 * (0..self.params.len()).filter(|&i| self.is_weight(i)).map(|i| self.params[i].powi(2)).sum::<f64>()
    }

    /// Mean squared error over the selected rows plus the L2 penalty on
    /// weights (biases excluded).
    pub fn loss(&self, data: &Dataset, rows: &[usize], l2: f64) -> f64 {
        let mse = rows.iter().map(|&i| (self.forward(data.row(i)) - data.y[i]).powi(2)).sum::<f64>() / rows.len().max(1) as f64;
        mse + self.l2_penalty(l2)
    }

    /// Loss and its gradient by backpropagation.
    pub fn loss_and_gradient(&self, data: &Dataset, rows: &[usize], l2: f64, grad: &mut [f64]) -> f64 {
        grad.fill(0.0);
        let (b1, w2) = (self.b1_at(), self.w2_at());
        let last = self.params.len() - 1;
        let scale = 1.0 / rows.len().max(1) as f64;
        let mut hidden = vec![0.0; self.n_hidden];
        let mut sse = 0.0;
        for &i in rows {
            let x = data.row(i);
            let mut out = self.params[last];
            for (j, s) in hidden.iter_mut().enumerate() {
                let w = &self.params[j * self.n_in..(j + 1) * self.n_in];
                *s = sigmoid(self.params[b1 + j] + w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>());
                out += self.params[w2 + j] * *s;
            }
            let r = out - data.y[i];
            sse += r * r;
            let dout = 2.0 * r * scale;
            grad[last] += dout;
            for (j, &s) in hidden.iter().enumerate() {
                grad[w2 + j] += dout * s;
                let da = dout * self.params[w2 + j] * s * (1.0 - s);
                grad[b1 + j] += da;
                for (g, xi) in grad[j * self.n_in..(j + 1) * self.n_in].iter_mut().zip(x) {
                    *g += da * xi;
                }
            }
        }
        for (k, g) in grad.iter_mut().enumerate() {
            if self.is_weight(k) {
                *g += 2.0 * l2 * self.params[k];
            }
        }
        sse * scale + self.l2_penalty(l2)
    }
}

/// A trained network for one horizon with its normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnModel {
    pub config: AnnConfig,
    pub net: Mlp,
    pub input_norm: Vec<Normalizer>,
    pub output_norm: Normalizer,
}

impl AnnModel {
    /// Differenced-scale prediction from raw inputs.
    pub fn predict(&self, features: &[f64]) -> f64 {
        let x: Vec<f64> = features.iter().zip(&self.input_norm).map(|(v, n)| n.apply(*v)).collect();
        self.output_norm.invert(self.net.forward(&x))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Penalized training loss after each epoch, normalized scale.
    pub train_loss: Vec<f64>,
    /// Hold-out mean squared error after each epoch, normalized scale.
    pub holdout_mse: Vec<f64>,
    /// 0 means the initial weights were never improved on.
    pub best_epoch: usize,
    pub best_holdout_mse: f64,
}

fn normalized(data: &Dataset, input: &[Normalizer], output: Normalizer) -> Dataset {
    let mut out = Dataset::new(data.n_features);
    out.x = data.x.chunks(data.n_features).flat_map(|r| r.iter().zip(input).map(|(v, n)| n.apply(*v))).collect();
    out.y = data.y.iter().map(|y| output.apply(*y)).collect();
    out
}

/// Trains by gradient descent with momentum, keeping the weights with the
/// lowest hold-out error.
pub fn train(train_set: &Dataset, holdout: &Dataset, cfg: &AnnConfig) -> Result<(AnnModel, TrainReport)> {
    cfg.validate()?;
    if train_set.is_empty() || holdout.is_empty() {
        return Err(Error::InsufficientHistory("empty training or hold-out set".into()));
    }
    if train_set.n_features != holdout.n_features {
        return Err(Error::ConfigInvalid("training and hold-out inputs differ in width".into()));
    }
    let n_in = train_set.n_features;
    let input_norm: Vec<Normalizer> = (0..n_in).map(|k| Normalizer::fit(train_set.x.iter().skip(k).step_by(n_in).copied())).collect();
    let output_norm = Normalizer::fit(train_set.y.iter().copied());
    let tr = normalized(train_set, &input_norm, output_norm);
    let ho = normalized(holdout, &input_norm, output_norm);
    let all_train: Vec<usize> = (0..tr.len()).collect();
    let all_hold: Vec<usize> = (0..ho.len()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut net = Mlp::init(n_in, cfg.hidden_units, &mut rng);
    let mut best = net.clone();
    let mut best_mse = net.loss(&ho, &all_hold, 0.0);
    let mut report = TrainReport { train_loss: Vec::new(), holdout_mse: Vec::new(), best_epoch: 0, best_holdout_mse: best_mse };
    let mut velocity = vec![0.0; net.params.len()];
    let mut grad = vec![0.0; net.params.len()];
    let batch = if cfg.batch_size == 0 { tr.len() } else { cfg.batch_size.min(tr.len()) };
    let mut order = all_train.clone();
    let mut stale = 0;
    for epoch in 1..=cfg.epochs {
        if batch < tr.len() {
            order.shuffle(&mut rng);
        }
        for rows in order.chunks(batch) {
            net.loss_and_gradient(&tr, rows, cfg.l2_regularization, &mut grad);
            for ((p, v), g) in net.params.iter_mut().zip(&mut velocity).zip(&grad) {
                *v = cfg.momentum * *v - cfg.learning_rate * g;
                *p += *v;
            }
        }
        let loss = net.loss(&tr, &all_train, cfg.l2_regularization);
        let mse = net.loss(&ho, &all_hold, 0.0);
        if !loss.is_finite() || !mse.is_finite() {
            return Err(Error::Divergence(format!(
                "horizon {} epoch {epoch}: training loss {loss}, hold-out MSE {mse} (lr {}, momentum {})",
                cfg.horizon, cfg.learning_rate, cfg.momentum
            )));
        }
        report.train_loss.push(loss);
        report.holdout_mse.push(mse);
        if mse < best_mse {
            best_mse = mse;
            best = net.clone();
            report.best_epoch = epoch;
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience.max(1) {
                break;
            }
        }
    }
    report.best_holdout_mse = best_mse;
    log::debug!("horizon {}: best epoch {} hold-out MSE {best_mse:.5}", cfg.horizon, report.best_epoch);
    Ok((AnnModel { config: *cfg, net: best, input_norm, output_norm }, report))
}

/// Trains every candidate and returns the one with the lowest hold-out
/// error, preferring fewer hidden units and then a lower learning rate on
/// ties, together with each candidate's score.
pub fn select_hyperparams(
    candidates: &[AnnConfig],
    train_set: &Dataset,
    holdout: &Dataset,
) -> Result<(AnnModel, Vec<(AnnConfig, f64)>)> {
    let mut best: Option<(AnnModel, f64)> = None;
    let mut scores = Vec::with_capacity(candidates.len());
    for cfg in candidates {
        let (model, rep) = train(train_set, holdout, cfg)?;
        scores.push((*cfg, rep.best_holdout_mse));
        let better = match &best {
            None => true,
            Some((b, s)) => {
                let key = |c: &AnnConfig, s: f64| (s, c.hidden_units, c.learning_rate);
                key(cfg, rep.best_holdout_mse).partial_cmp(&key(&b.config, *s)) == Some(std::cmp::Ordering::Less)
            }
        };
        if better {
            best = Some((model, rep.best_holdout_mse));
        }
    }
    best.map(|(m, _)| (m, scores)).ok_or_else(|| Error::ConfigInvalid("empty hyperparameter grid".into()))
}

/// Fits one network per horizon on `ys_log[..est_len]`, holding out its
/// final `holdout_len` periods, searching `grid` if given.
pub fn fit_horizons(
    ys_log: &[f64],
    start: PeriodStamp,
    table: &AnnualLagTable,
    horizons: &[usize],
    holdout_len: usize,
    base: &AnnConfig,
    grid: Option<&AnnGrid>,
) -> Result<BTreeMap<usize, AnnModel>> {
    let holdout_from = ys_log
        .len()
        .checked_sub(holdout_len)
        .ok_or(Error::SeriesTooShort { needed: holdout_len, have: ys_log.len() })?;
    let mut out = BTreeMap::new();
    for &h in horizons {
        let (tr, ho) = build_datasets(ys_log, start, table, h, base.calendar_inputs, holdout_from)?;
        let cfg = AnnConfig { horizon: h, ..*base };
        let model = match grid {
            Some(g) => select_hyperparams(&g.configs(&cfg), &tr, &ho)?.0,
            None => train(&tr, &ho, &cfg)?.0,
        };
        out.insert(h, model);
    }
    Ok(out)
}

/// Versioned on-disk form of a set of per-horizon networks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnBundle {
    pub version: u32,
    pub start: PeriodStamp,
    pub models: BTreeMap<usize, AnnModel>,
}

impl AnnBundle {
    pub fn new(start: PeriodStamp, models: BTreeMap<usize, AnnModel>) -> Self {
        Self { version: FORMAT_VERSION, start, models }
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }

    pub fn read_json<R: Read>(reader: R) -> Result<Self> {
        let b: Self = serde_json::from_reader(reader)?;
        if b.version != FORMAT_VERSION {
            return Err(Error::ConfigInvalid(format!("unsupported ANN model version {}", b.version)));
        }
        if b.models.values().any(|m| m.net.params.iter().any(|p| !p.is_finite()) || m.input_norm.iter().any(|n| n.sd <= 0.0)) {
            return Err(Error::ConfigInvalid("ANN model file holds non-finite weights or zero spread".into()));
        }
        Ok(b)
    }
}

/// Per-horizon networks driven observation by observation. Horizons without
/// a network forecast `None`.
#[derive(Debug, Clone)]
pub struct AnnForecaster {
    name: String,
    models: BTreeMap<usize, AnnModel>,
    table: Arc<AnnualLagTable>,
    start: PeriodStamp,
    ys: Vec<f64>,
    z: Vec<f64>,
}

impl AnnForecaster {
    pub fn new(name: impl Into<String>, models: BTreeMap<usize, AnnModel>, table: Arc<AnnualLagTable>, start: PeriodStamp) -> Self {
        Self { name: name.into(), models, table, start, ys: Vec::new(), z: Vec::new() }
    }

    pub fn models(&self) -> &BTreeMap<usize, AnnModel> {
        &self.models
    }

    /// Log-load prediction for `origin + h` from observations up to
    /// `origin` inclusive.
    pub fn predict_at(&self, origin: usize, h: usize) -> Result<Option<f64>> {
        let Some(model) = self.models.get(&h) else {
            return Ok(None);
        };
        if origin >= self.ys.len() {
            return Err(Error::SeriesTooShort { needed: origin + 1, have: self.ys.len() });
        }
        let t = origin + h;
        let f = build_features(t, h, &self.table, &self.z[..=origin], self.start, model.config.calendar_inputs)?;
        Ok(Some(model.predict(&f) + seasonal_base(&self.ys, t)))
    }
}

impl Forecaster for AnnForecaster {
    fn name(&self) -> &str {
        &self.name
    }

    fn observed(&self) -> usize {
        self.ys.len()
    }

    fn observe(&mut self, y_log: f64) -> Result<()> {
        self.ys.push(y_log);
        self.z.push(differenced_at(&self.ys, self.ys.len() - 1));
        Ok(())
    }

    fn forecast(&self, horizon: usize) -> Result<Vec<Option<f64>>> {
        let origin = self.ys.len().checked_sub(1).ok_or(Error::SeriesTooShort { needed: 1, have: 0 })?;
        (1..=horizon).map(|h| self.predict_at(origin, h)).collect()
    }
}
