//! Triple seasonal ARMA with rule-based annual lags (RB-SARMA).
//!
//! Every lag polynomial is written `1 + c₁Lᵏ + c₂L²ᵏ + …`, so an AR(1) whose
//! textbook coefficient is `a` carries the stored coefficient `−a`. The three
//! annual terms use the nested lags of [`AnnualLagTable::nested_lags`], all
//! evaluated at the target period, and switch between a normal-day pair of
//! polynomials and a special-day pair according to the target's day type.
//!
//! With the annual lags fixed at `t`, the AR side factors as
//! `U_t + Σ η_j U_{t−L_j(t)}` where `U_s = Σ_k b_k x_{s−k}` is the short,
//! daily and weekly product applied to `x = y − c`. The MA side factors the
//! same way, which keeps each step linear in the number of polynomial terms.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{fit_transformed, FitResult, MinimizeOptions, Transform, VARIANCE_FLOOR};
use crate::model::Forecaster;
use crate::rules::AnnualLagTable;
use crate::series::{PERIODS_PER_DAY, PERIODS_PER_WEEK};

/// Largest order accepted for any factor.
pub const MAX_ORDER: usize = 3;
/// Number of annual terms in each annual polynomial.
pub const ANNUAL_TERMS: usize = 3;
/// Residuals before this offset are fixed at zero and excluded from the
/// likelihood.
pub const DEFAULT_BURN_IN: usize = 365 * PERIODS_PER_DAY;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SarmaOrders {
    pub p: usize,
    pub p1: usize,
    pub p2: usize,
    pub q: usize,
    pub q1: usize,
    pub q2: usize,
}

impl Default for SarmaOrders {
    fn default() -> Self {
        Self { p: 2, p1: 1, p2: 1, q: 2, q1: 1, q2: 1 }
    }
}

impl SarmaOrders {
    pub fn validate(&self) -> Result<()> {
        let all = [self.p, self.p1, self.p2, self.q, self.q1, self.q2];
        if all.iter().any(|&o| o > MAX_ORDER) {
            return Err(Error::ConfigInvalid(format!("SARMA orders must be at most {MAX_ORDER}: {self}")));
        }
        Ok(())
    }

    /// The default search grid: 27 candidates varying `p`, `q` in 1..=3 and
    /// the daily and weekly orders together in 0..=2.
    pub fn default_grid() -> Vec<SarmaOrders> {
        let mut grid = Vec::new();
        for p in 1..=3 {
            for q in 1..=3 {
                for s in 0..=2 {
                    grid.push(SarmaOrders { p, p1: s.min(1), p2: s / 2, q, q1: s.min(1), q2: s / 2 });
                }
            }
        }
        grid
    }
}

impl fmt::Display for SarmaOrders {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{},{},{}", self.p, self.p1, self.p2, self.q, self.q1, self.q2)
    }
}

impl std::str::FromStr for SarmaOrders {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let v: Vec<usize> = s
            .split(',')
            .map(|x| x.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::ConfigInvalid(format!("bad orders {s:?}: {e}")))?;
        if v.len() != 6 {
            return Err(Error::ConfigInvalid(format!("orders need six values p,P1,P2,q,Q1,Q2: {s:?}")));
        }
        let o = SarmaOrders { p: v[0], p1: v[1], p2: v[2], q: v[3], q1: v[4], q2: v[5] };
        o.validate()?;
        Ok(o)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SarmaParams {
    pub c: f64,
    pub ar_short: Vec<f64>,
    pub ar_daily: Vec<f64>,
    pub ar_weekly: Vec<f64>,
    pub ma_short: Vec<f64>,
    pub ma_daily: Vec<f64>,
    pub ma_weekly: Vec<f64>,
    pub annual_ar_normal: [f64; ANNUAL_TERMS],
    pub annual_ma_normal: [f64; ANNUAL_TERMS],
    pub annual_ar_special: [f64; ANNUAL_TERMS],
    pub annual_ma_special: [f64; ANNUAL_TERMS],
    pub sigma_n2: f64,
    pub sigma_s2: f64,
}

impl SarmaParams {
    /// All coefficients zero.
    pub fn zeros(orders: &SarmaOrders, c: f64) -> Self {
        Self {
            c,
            ar_short: vec![0.0; orders.p],
            ar_daily: vec![0.0; orders.p1],
            ar_weekly: vec![0.0; orders.p2],
            ma_short: vec![0.0; orders.q],
            ma_daily: vec![0.0; orders.q1],
            ma_weekly: vec![0.0; orders.q2],
            annual_ar_normal: [0.0; ANNUAL_TERMS],
            annual_ma_normal: [0.0; ANNUAL_TERMS],
            annual_ar_special: [0.0; ANNUAL_TERMS],
            annual_ma_special: [0.0; ANNUAL_TERMS],
            sigma_n2: 1.0,
            sigma_s2: 1.0,
        }
    }

    /// Optimizer start: factor coefficients 0.1 with alternating sign, first
    /// annual coefficient −0.5 and the deeper annual coefficients 0. Three
    /// annual coefficients of −0.5 would make the annual MA non-invertible.
    pub fn starting(orders: &SarmaOrders, c: f64) -> Self {
        let alt = |n: usize| (0..n).map(|i| if i % 2 == 0 { 0.1 } else { -0.1 }).collect::<Vec<_>>();
        Self {
            ar_short: alt(orders.p),
            ar_daily: alt(orders.p1),
            ar_weekly: alt(orders.p2),
            ma_short: alt(orders.q),
            ma_daily: alt(orders.q1),
            ma_weekly: alt(orders.q2),
            annual_ar_normal: [-0.5, 0.0, 0.0],
            annual_ma_normal: [-0.5, 0.0, 0.0],
            annual_ar_special: [-0.5, 0.0, 0.0],
            annual_ma_special: [-0.5, 0.0, 0.0],
            ..Self::zeros(orders, c)
        }
    }

    pub fn orders(&self) -> SarmaOrders {
        SarmaOrders {
            p: self.ar_short.len(),
            p1: self.ar_daily.len(),
            p2: self.ar_weekly.len(),
            q: self.ma_short.len(),
            q1: self.ma_daily.len(),
            q2: self.ma_weekly.len(),
        }
    }

    /// Short, daily and weekly AR factors multiplied out.
    pub fn ar_polynomial(&self) -> LagPolynomial {
        LagPolynomial::factor(1, &self.ar_short)
            .mul(&LagPolynomial::factor(PERIODS_PER_DAY, &self.ar_daily))
            .mul(&LagPolynomial::factor(PERIODS_PER_WEEK, &self.ar_weekly))
    }

    pub fn ma_polynomial(&self) -> LagPolynomial {
        LagPolynomial::factor(1, &self.ma_short)
            .mul(&LagPolynomial::factor(PERIODS_PER_DAY, &self.ma_daily))
            .mul(&LagPolynomial::factor(PERIODS_PER_WEEK, &self.ma_weekly))
    }

    fn annual(&self, special: bool) -> (&[f64; ANNUAL_TERMS], &[f64; ANNUAL_TERMS]) {
        if special {
            (&self.annual_ar_special, &self.annual_ma_special)
        } else {
            (&self.annual_ar_normal, &self.annual_ma_normal)
        }
    }

    /// Flattens the coefficients; the special-day annual terms are included
    /// only when `with_special` is set.
    fn to_vec(&self, with_special: bool) -> Vec<f64> {
        let mut v = vec![self.c];
        for part in [&self.ar_short, &self.ar_daily, &self.ar_weekly, &self.ma_short, &self.ma_daily, &self.ma_weekly] {
            v.extend_from_slice(part);
        }
        v.extend_from_slice(&self.annual_ar_normal);
        v.extend_from_slice(&self.annual_ma_normal);
        if with_special {
            v.extend_from_slice(&self.annual_ar_special);
            v.extend_from_slice(&self.annual_ma_special);
        }
        v
    }

    /// Inverse of `to_vec`. Without special terms the special-day annual
    /// polynomials copy the normal ones.
    fn from_vec(orders: &SarmaOrders, v: &[f64], with_special: bool) -> Self {
        let mut it = v.iter().copied();
        let mut take = |n: usize| (0..n).map(|_| it.next().unwrap_or(0.0)).collect::<Vec<_>>();
        let c = take(1)[0];
        let ar_short = take(orders.p);
        let ar_daily = take(orders.p1);
        let ar_weekly = take(orders.p2);
        let ma_short = take(orders.q);
        let ma_daily = take(orders.q1);
        let ma_weekly = take(orders.q2);
        let arr = |x: Vec<f64>| [x[0], x[1], x[2]];
        let annual_ar_normal = arr(take(ANNUAL_TERMS));
        let annual_ma_normal = arr(take(ANNUAL_TERMS));
        let (annual_ar_special, annual_ma_special) = if with_special {
            (arr(take(ANNUAL_TERMS)), arr(take(ANNUAL_TERMS)))
        } else {
            (annual_ar_normal, annual_ma_normal)
        };
        Self {
            c,
            ar_short,
            ar_daily,
            ar_weekly,
            ma_short,
            ma_daily,
            ma_weekly,
            annual_ar_normal,
            annual_ma_normal,
            annual_ar_special,
            annual_ma_special,
            sigma_n2: 1.0,
            sigma_s2: 1.0,
        }
    }

    /// Whether every MA factor, including both annual MA polynomials read as
    /// polynomials in the annual lag, has its roots outside the unit circle.
    pub fn is_invertible(&self) -> bool {
        [&self.ma_short[..], &self.ma_daily, &self.ma_weekly, &self.annual_ma_normal, &self.annual_ma_special]
            .iter()
            .all(|c| roots_outside_unit_circle(c))
    }

    /// Warns when a factor has a root on or inside the unit circle.
    pub fn check_roots(&self) -> Vec<String> {
        let mut out = Vec::new();
        let named = [
            ("ar_short", &self.ar_short),
            ("ar_daily", &self.ar_daily),
            ("ar_weekly", &self.ar_weekly),
            ("ma_short", &self.ma_short),
            ("ma_daily", &self.ma_daily),
            ("ma_weekly", &self.ma_weekly),
        ];
        for (name, coeffs) in named {
            if !roots_outside_unit_circle(coeffs) {
                out.push(format!("{name} has a root inside the unit circle"));
            }
        }
        for name in &out {
            log::warn!("{name}");
        }
        out
    }
}

/// Whether `1 + c₁z + … + c_k z^k` has every root strictly outside the unit
/// circle. Uses the companion matrix eigenvalues of the reciprocal
/// polynomial, which must lie inside the unit circle.
pub fn roots_outside_unit_circle(coeffs: &[f64]) -> bool {
    let k = coeffs.iter().rposition(|c| *c != 0.0).map_or(0, |i| i + 1);
    if k == 0 {
        return true;
    }
    // z^k + c₁z^{k−1} + … + c_k has the reciprocal roots.
    let mut m = nalgebra::DMatrix::<f64>::zeros(k, k);
    for j in 0..k {
        m[(0, j)] = -coeffs[j];
    }
    for i in 1..k {
        m[(i, i - 1)] = 1.0;
    }
    m.complex_eigenvalues().iter().all(|z| z.norm() < 1.0)
}

/// Sparse lag polynomial `1 + Σ coeff·L^lag`; the unit constant is implicit.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LagPolynomial {
    /// Strictly increasing positive lags.
    terms: Vec<(usize, f64)>,
}

impl LagPolynomial {
    pub fn one() -> Self {
        Self::default()
    }

    /// `1 + c₁L^s + c₂L^{2s} + …`.
    pub fn factor(season: usize, coeffs: &[f64]) -> Self {
        Self::from_terms(coeffs.iter().enumerate().map(|(i, &c)| ((i + 1) * season, c)))
    }

    /// Sums coefficients of repeated lags; lag 0 terms are rejected.
    pub fn from_terms(terms: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut map = BTreeMap::new();
        for (lag, c) in terms {
            assert!(lag > 0, "lag polynomial terms must have positive lags");
            *map.entry(lag).or_insert(0.0) += c;
        }
        Self { terms: map.into_iter().collect() }
    }

    pub fn terms(&self) -> &[(usize, f64)] {
        &self.terms
    }

    pub fn max_lag(&self) -> usize {
        self.terms.last().map_or(0, |t| t.0)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut all: Vec<(usize, f64)> = Vec::with_capacity((self.terms.len() + 1) * (other.terms.len() + 1));
        all.extend_from_slice(&self.terms);
        all.extend_from_slice(&other.terms);
        for &(a, ca) in &self.terms {
            for &(b, cb) in &other.terms {
                all.push((a + b, ca * cb));
            }
        }
        Self::from_terms(all)
    }
}

impl fmt::Display for LagPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "1")?;
        for (lag, c) in &self.terms {
            write!(f, " {} {}·L^{lag}", if *c < 0.0 { '-' } else { '+' }, c.abs())?;
        }
        Ok(())
    }
}

/// Cumulative nested annual lags at offset `t`.
pub fn annual_lags(t: usize, table: &AnnualLagTable) -> Result<[usize; ANNUAL_TERMS]> {
    let nested = table.nested_lags(t);
    let mut out = [0; ANNUAL_TERMS];
    for (slot, v) in out.iter_mut().zip(nested) {
        *slot = v.ok_or_else(|| Error::InsufficientHistory(format!("nested annual lag at offset {t} leaves the table")))?;
    }
    Ok(out)
}

/// The full AR and MA lag sets at `t`, for audit. Annual terms whose lag
/// reaches before the series start are omitted.
pub fn expand_at(params: &SarmaParams, table: &AnnualLagTable, t: usize) -> (LagPolynomial, LagPolynomial) {
    let (ar_a, ma_a) = params.annual(table.is_special_at(t));
    let nested = table.nested_lags(t);
    let annual = |coeffs: &[f64; ANNUAL_TERMS]| {
        LagPolynomial::from_terms(
            nested
                .iter()
                .zip(coeffs)
                .filter_map(|(l, c)| l.filter(|&l| l <= t).map(|l| (l, *c))),
        )
    };
    (params.ar_polynomial().mul(&annual(ar_a)), params.ma_polynomial().mul(&annual(ma_a)))
}

/// Output of a residual pass.
#[derive(Debug, Clone, PartialEq)]
pub struct SarmaResiduals {
    pub residuals: Vec<f64>,
    pub sse_normal: f64,
    pub sse_special: f64,
    pub n_normal: usize,
    pub n_special: usize,
    /// Annual terms skipped because their lag reached before the series start.
    pub dropped_terms: usize,
}

/// Running recursion state. Holds the full history of the centred series,
/// the AR-filtered series, residuals and MA-filtered residuals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SarmaState {
    x: Vec<f64>,
    u: Vec<f64>,
    e: Vec<f64>,
    m: Vec<f64>,
    burn_in: usize,
    pub dropped_terms: usize,
}

/// Precomputed polynomials for one parameter vector.
#[derive(Debug, Clone)]
struct Compiled {
    c: f64,
    ar: Vec<(usize, f64)>,
    ma: Vec<(usize, f64)>,
    annual_normal: ([f64; ANNUAL_TERMS], [f64; ANNUAL_TERMS]),
    annual_special: ([f64; ANNUAL_TERMS], [f64; ANNUAL_TERMS]),
}

impl Compiled {
    fn new(p: &SarmaParams) -> Self {
        Self {
            c: p.c,
            ar: p.ar_polynomial().terms,
            ma: p.ma_polynomial().terms,
            annual_normal: (p.annual_ar_normal, p.annual_ma_normal),
            annual_special: (p.annual_ar_special, p.annual_ma_special),
        }
    }
}

fn lagged_sum(terms: &[(usize, f64)], t: usize, get: impl Fn(usize) -> f64) -> f64 {
    terms
        .iter()
        .take_while(|(lag, _)| *lag <= t)
        .map(|&(lag, c)| c * get(t - lag))
        .sum()
}

impl SarmaState {
    pub fn new(burn_in: usize) -> Self {
        Self { x: Vec::new(), u: Vec::new(), e: Vec::new(), m: Vec::new(), burn_in, dropped_terms: 0 }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn residuals(&self) -> &[f64] {
        &self.e
    }

    fn reserve(&mut self, n: usize) {
        self.x.reserve(n);
        self.u.reserve(n);
        self.e.reserve(n);
        self.m.reserve(n);
    }

    /// Annual AR and MA contributions at `t`.
    fn annual_terms(&mut self, k: &Compiled, table: &AnnualLagTable, t: usize) -> (f64, f64) {
        let (ar_a, ma_a) = if table.is_special_at(t) { &k.annual_special } else { &k.annual_normal };
        let (mut ar, mut ma) = (0.0, 0.0);
        for (j, lag) in table.nested_lags(t).into_iter().enumerate() {
            match lag {
                Some(l) if l <= t => {
                    ar += ar_a[j] * self.u[t - l];
                    ma += ma_a[j] * self.m[t - l];
                }
                _ => {
                    if ar_a[j] != 0.0 || ma_a[j] != 0.0 {
                        self.dropped_terms += 1;
                    }
                }
            }
        }
        (ar, ma)
    }

    fn step(&mut self, k: &Compiled, table: &AnnualLagTable, y: f64) -> f64 {
        let t = self.x.len();
        let x = y - k.c;
        self.x.push(x);
        let u = x + lagged_sum(&k.ar, t, |i| self.x[i]);
        self.u.push(u);
        let m_past = lagged_sum(&k.ma, t, |i| self.e[i]);
        let e = if t < self.burn_in {
            0.0
        } else {
            let (ar, ma) = self.annual_terms(k, table, t);
            u + ar - m_past - ma
        };
        self.e.push(e);
        self.m.push(e + m_past);
        e
    }

    /// Forecasts `1..=horizon` steps ahead with future residuals at zero.
    fn forecast(&self, k: &Compiled, table: &AnnualLagTable, horizon: usize) -> Result<Vec<f64>> {
        let n = self.x.len();
        let mut fx: Vec<f64> = Vec::with_capacity(horizon);
        let mut fu: Vec<f64> = Vec::with_capacity(horizon);
        let mut fm: Vec<f64> = Vec::with_capacity(horizon);
        for h in 0..horizon {
            let t = n + h;
            if t >= table.len() {
                return Err(Error::DateNotCovered(table.start().advance(t as i64).date));
            }
            let get = |hist: &[f64], fut: &[f64], i: usize| if i < n { hist[i] } else { fut[i - n] };
            let ar_past = lagged_sum(&k.ar, t, |i| get(&self.x, &fx, i));
            let m_past = lagged_sum(&k.ma, t, |i| if i < n { self.e[i] } else { 0.0 });
            let (ar_a, ma_a) = if table.is_special_at(t) { &k.annual_special } else { &k.annual_normal };
            let (mut ar, mut ma) = (0.0, 0.0);
            if t >= self.burn_in {
                for (j, lag) in table.nested_lags(t).into_iter().enumerate() {
                    if let Some(l) = lag.filter(|&l| l <= t) {
                        if t - l >= n {
                            return Err(Error::MissingAnnualIndex { offset: t, lag: l });
                        }
                        ar += ar_a[j] * get(&self.u, &fu, t - l);
                        ma += ma_a[j] * get(&self.m, &fm, t - l);
                    }
                }
            }
            // Zero residual: x + ar_past + ar − m_past − ma = 0.
            let x = m_past + ma - ar_past - ar;
            fx.push(x);
            fu.push(x + ar_past);
            fm.push(m_past);
        }
        Ok(fx.into_iter().map(|x| x + k.c).collect())
    }
}

/// Runs the recursion over a whole log-load series.
pub fn residuals(ys: &[f64], params: &SarmaParams, table: &AnnualLagTable, burn_in: usize) -> Result<SarmaResiduals> {
    if table.len() < ys.len() {
        return Err(Error::InsufficientHistory(format!(
            "lag table covers {} periods, series has {}",
            table.len(),
            ys.len()
        )));
    }
    let k = Compiled::new(params);
    let mut state = SarmaState::new(burn_in);
    state.reserve(ys.len());
    let (mut sse_normal, mut sse_special, mut n_normal, mut n_special) = (0.0, 0.0, 0, 0);
    for (t, &y) in ys.iter().enumerate() {
        let e = state.step(&k, table, y);
        if t >= burn_in {
            if table.is_special_at(t) {
                sse_special += e * e;
                n_special += 1;
            } else {
                sse_normal += e * e;
                n_normal += 1;
            }
        }
    }
    Ok(SarmaResiduals {
        dropped_terms: state.dropped_terms,
        residuals: state.e,
        sse_normal,
        sse_special,
        n_normal,
        n_special,
    })
}

fn concentrated_nll(r: &SarmaResiduals) -> (f64, f64, f64) {
    let term = |ss: f64, n: usize| {
        if n == 0 {
            (0.0, f64::NAN)
        } else {
            let v = (ss / n as f64).max(VARIANCE_FLOOR);
            (0.5 * n as f64 * ((2.0 * std::f64::consts::PI * v).ln() + 1.0), v)
        }
    };
    let (a, vn) = term(r.sse_normal, r.n_normal);
    let (b, vs) = term(r.sse_special, r.n_special);
    let nll = a + b;
    (if nll.is_finite() { nll } else { f64::INFINITY }, vn, vs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SarmaFitConfig {
    pub burn_in: usize,
    pub optimizer: MinimizeOptions,
}

impl Default for SarmaFitConfig {
    fn default() -> Self {
        Self { burn_in: DEFAULT_BURN_IN, optimizer: MinimizeOptions::default() }
    }
}

/// Maximum-likelihood fit from the default starting point.
pub fn fit(
    ys: &[f64],
    orders: &SarmaOrders,
    table: &AnnualLagTable,
    cfg: &SarmaFitConfig,
) -> Result<(SarmaParams, FitResult)> {
    let c = ys.iter().sum::<f64>() / ys.len().max(1) as f64;
    fit_from(ys, &SarmaParams::starting(orders, c), table, cfg)
}

/// Maximum-likelihood fit from `start`. The special-day annual terms are
/// estimated only when the table marks special days after the burn-in.
pub fn fit_from(
    ys: &[f64],
    start: &SarmaParams,
    table: &AnnualLagTable,
    cfg: &SarmaFitConfig,
) -> Result<(SarmaParams, FitResult)> {
    let orders = start.orders();
    orders.validate()?;
    if ys.len() <= cfg.burn_in + 2 * PERIODS_PER_WEEK {
        return Err(Error::SeriesTooShort { needed: cfg.burn_in + 2 * PERIODS_PER_WEEK + 1, have: ys.len() });
    }
    // Evaluate once up front so table coverage errors surface as errors.
    residuals(ys, start, table, cfg.burn_in)?;
    if !start.is_invertible() {
        return Err(Error::ConfigInvalid("SARMA starting point has a non-invertible MA factor".into()));
    }
    let rb = (cfg.burn_in..ys.len()).any(|t| table.is_special_at(t));
    let run = |x0: &[f64], with_special: bool| {
        let transforms = vec![Transform::Identity; x0.len()];
        fit_transformed(&transforms, x0, &cfg.optimizer, |v| {
            let p = SarmaParams::from_vec(&orders, v, with_special);
            if !p.is_invertible() {
                return f64::INFINITY;
            }
            residuals(ys, &p, table, cfg.burn_in).map_or(f64::INFINITY, |r| concentrated_nll(&r).0)
        })
    };
    // Rule-based fits first fit the model with shared annual polynomials,
    // then free the special-day polynomials from that optimum.
    let (shared, first) = run(&start.to_vec(false), false);
    let (best, res) = if rb {
        let (best, mut res) = run(&SarmaParams::from_vec(&orders, &shared, false).to_vec(true), true);
        res.evals += first.evals;
        (best, res)
    } else {
        (shared, first)
    };
    let mut params = SarmaParams::from_vec(&orders, &best, rb);
    let r = residuals(ys, &params, table, cfg.burn_in)?;
    let (nll, vn, vs) = concentrated_nll(&r);
    params.sigma_n2 = vn;
    params.sigma_s2 = if vs.is_nan() { vn } else { vs };
    params.check_roots();
    if r.dropped_terms > 0 {
        log::info!("SARMA fit dropped {} annual terms reaching before the series start", r.dropped_terms);
    }
    if !res.converged {
        log::warn!("SARMA fit did not converge after {} evaluations", res.evals);
    }
    Ok((
        params.clone(),
        FitResult {
            params: best,
            nll,
            evaluations: res.evals,
            converged: res.converged,
            sigma_n2: params.sigma_n2,
            sigma_s2: params.sigma_s2,
        },
    ))
}

/// Number of estimated coefficients, including the constant.
pub fn parameter_count(orders: &SarmaOrders, rule_based: bool) -> usize {
    1 + orders.p + orders.p1 + orders.p2 + orders.q + orders.q1 + orders.q2 + ANNUAL_TERMS * if rule_based { 4 } else { 2 }
}

/// Fits each candidate and returns the one with the smallest AIC together
/// with every successful candidate's AIC. Failing candidates are skipped.
pub fn select_orders(
    ys: &[f64],
    table: &AnnualLagTable,
    grid: &[SarmaOrders],
    cfg: &SarmaFitConfig,
) -> Result<(SarmaOrders, Vec<(SarmaOrders, f64)>)> {
    if grid.is_empty() {
        return Err(Error::ConfigInvalid("empty SARMA order grid".into()));
    }
    let rb = (cfg.burn_in..ys.len()).any(|t| table.is_special_at(t));
    let mut scores = Vec::new();
    for o in grid {
        o.validate()?;
        match fit(ys, o, table, cfg) {
            Ok((_, f)) => scores.push((*o, 2.0 * parameter_count(o, rb) as f64 + 2.0 * f.nll)),
            Err(e) => log::warn!("SARMA candidate {o} failed: {e}"),
        }
    }
    let best = scores
        .iter()
        .filter(|s| s.1.is_finite())
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|s| s.0)
        .ok_or_else(|| Error::Divergence("no SARMA candidate could be fitted".into()))?;
    Ok((best, scores))
}

/// A fitted SARMA model driven observation by observation.
#[derive(Debug, Clone)]
pub struct SarmaModel {
    name: String,
    params: SarmaParams,
    compiled: Compiled,
    state: SarmaState,
    table: Arc<AnnualLagTable>,
}

impl SarmaModel {
    pub fn new(name: impl Into<String>, params: SarmaParams, table: Arc<AnnualLagTable>, burn_in: usize) -> Self {
        Self {
            name: name.into(),
            compiled: Compiled::new(&params),
            params,
            state: SarmaState::new(burn_in),
            table,
        }
    }

    pub fn params(&self) -> &SarmaParams {
        &self.params
    }

    pub fn state(&self) -> &SarmaState {
        &self.state
    }

    /// Absorbs many observations with one allocation.
    pub fn observe_all(&mut self, ys: &[f64]) -> Result<()> {
        self.state.reserve(ys.len());
        ys.iter().try_for_each(|&y| self.observe(y))
    }
}

impl Forecaster for SarmaModel {
    fn name(&self) -> &str {
        &self.name
    }

    fn observed(&self) -> usize {
        self.state.len()
    }

    fn observe(&mut self, y_log: f64) -> Result<()> {
        let t = self.state.len();
        if t >= self.table.len() {
            return Err(Error::DateNotCovered(self.table.start().advance(t as i64).date));
        }
        self.state.step(&self.compiled, &self.table, y_log);
        Ok(())
    }

    fn forecast(&self, horizon: usize) -> Result<Vec<Option<f64>>> {
        Ok(self
            .state
            .forecast(&self.compiled, &self.table, horizon)?
            .into_iter()
            .map(Some)
            .collect())
    }
}
