//! Maximum-likelihood machinery shared by the smoothing and ARMA models.
//!
//! Errors on normal and special days are Gaussian with separate variances.
//! Both variances are concentrated out, leaving a function of the model's
//! smoothing or polynomial coefficients only, which is minimized with a
//! restarted Nelder–Mead simplex on an unconstrained scale.

use std::f64::consts::PI;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Floor on concentrated variances so exact fits stay finite.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// Concentrated two-class negative log-likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassNll {
    pub nll: f64,
    pub sigma_n2: f64,
    pub sigma_s2: f64,
    pub n_normal: usize,
    pub n_special: usize,
}

/// Negative log-likelihood with variances replaced by their class-wise
/// mean squared residuals. Residuals before `skip` are ignored. When one
/// class is empty the other carries a single-variance likelihood and the
/// empty class's variance is reported as NaN.
pub fn two_class_nll(residuals: &[f64], special: &[bool], skip: usize) -> ClassNll {
    let (mut ss_n, mut ss_s, mut n_n, mut n_s) = (0.0, 0.0, 0usize, 0usize);
    for (e, s) in residuals.iter().zip(special).skip(skip) {
        if *s {
            ss_s += e * e;
            n_s += 1;
        } else {
            ss_n += e * e;
            n_n += 1;
        }
    }
    let term = |ss: f64, n: usize| -> (f64, f64) {
        if n == 0 {
            return (0.0, f64::NAN);
        }
        let var = (ss / n as f64).max(VARIANCE_FLOOR);
        let nf = n as f64;
        (0.5 * nf * (2.0 * PI * var).ln() + ss / (2.0 * var), var)
    };
    let (a, sigma_n2) = term(ss_n, n_n);
    let (b, sigma_s2) = term(ss_s, n_s);
    if n_s == 0 && n_n > 0 {
        log::debug!("no special-day residuals; single-variance likelihood");
    }
    ClassNll {
        nll: a + b,
        sigma_n2,
        sigma_s2,
        n_normal: n_n,
        n_special: n_s,
    }
}

/// Negative log-likelihood at given (not concentrated) variances.
pub fn nll_at(residuals: &[f64], special: &[bool], skip: usize, sigma_n2: f64, sigma_s2: f64) -> f64 {
    let mut out = 0.0;
    for (e, s) in residuals.iter().zip(special).skip(skip) {
        let v = if *s { sigma_s2 } else { sigma_n2 };
        out += 0.5 * (2.0 * PI * v).ln() + e * e / (2.0 * v);
    }
    out
}

/// Map between a parameter's natural range and the real line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Transform {
    /// Logistic onto `[0, 1]`.
    Unit,
    /// `tanh` onto `(-1, 1)`.
    Symmetric,
    Identity,
}

impl Transform {
    pub fn to_natural(self, u: f64) -> f64 {
        match self {
            Self::Unit => 1.0 / (1.0 + (-u).exp()),
            Self::Symmetric => u.tanh(),
            Self::Identity => u,
        }
    }

    pub fn to_unconstrained(self, x: f64) -> f64 {
        const EPS: f64 = 1e-12;
        match self {
            Self::Unit => {
                let x = x.clamp(EPS, 1.0 - EPS);
                (x / (1.0 - x)).ln()
            }
            Self::Symmetric => x.clamp(-1.0 + EPS, 1.0 - EPS).atanh(),
            Self::Identity => x,
        }
    }
}

pub fn to_natural(transforms: &[Transform], u: &[f64]) -> Vec<f64> {
    transforms.iter().zip(u).map(|(t, v)| t.to_natural(*v)).collect()
}

pub fn to_unconstrained(transforms: &[Transform], x: &[f64]) -> Vec<f64> {
    transforms.iter().zip(x).map(|(t, v)| t.to_unconstrained(*v)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOptions {
    pub max_evals: usize,
    /// Total simplex runs; each after the first starts from a perturbed copy
    /// of the best point found so far.
    pub restarts: usize,
    /// Stop when the simplex diameter falls below this.
    pub xtol: f64,
    /// Stop when the objective spread falls below `ftol * max(1, |f_best|)`.
    pub ftol: f64,
    /// Multiplicative perturbation of restart points.
    pub perturbation: f64,
    pub initial_step: f64,
    pub seed: u64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            max_evals: 5000,
            restarts: 3,
            xtol: 1e-6,
            ftol: 1e-9,
            perturbation: 0.2,
            initial_step: 0.1,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub converged: bool,
    /// `(evaluation count, best objective)` after each simplex iteration.
    pub trace: Vec<(usize, f64)>,
}

impl MinimizeResult {
    pub fn write_trace_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["evaluations", "nll"])?;
        for (n, f) in &self.trace {
            w.write_record([n.to_string(), f.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn clean(f: f64) -> f64 {
    if f.is_nan() {
        f64::INFINITY
    } else {
        f
    }
}

struct Simplex {
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl Simplex {
    fn sort(&mut self) {
        let mut idx: Vec<usize> = (0..self.points.len()).collect();
        idx.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]));
        self.points = idx.iter().map(|&i| self.points[i].clone()).collect();
        self.values = idx.iter().map(|&i| self.values[i]).collect();
    }

    fn diameter(&self) -> f64 {
        let best = &self.points[0];
        self.points[1..]
            .iter()
            .map(|p| {
                p.iter()
                    .zip(best)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

/// One Nelder–Mead run with dimension-adaptive coefficients.
fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    f: &mut F,
    start: &[f64],
    opts: &MinimizeOptions,
    evals: &mut usize,
    trace: &mut Vec<(usize, f64)>,
) -> (Vec<f64>, f64, bool) {
    let n = start.len();
    let nf = n as f64;
    let (alpha, gamma, rho, sigma) = if n >= 2 {
        (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf)
    } else {
        (1.0, 2.0, 0.5, 0.5)
    };
    let budget = *evals + opts.max_evals;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        clean(f(x))
    };

    let mut points = vec![start.to_vec()];
    for i in 0..n {
        let mut p = start.to_vec();
        let step = (opts.initial_step * p[i].abs()).max(opts.initial_step);
        p[i] += step;
        points.push(p);
    }
    let values = points.iter().map(|p| eval(p, evals)).collect();
    let mut s = Simplex { points, values };
    s.sort();

    loop {
        let spread = s.values[n] - s.values[0];
        let scale = s.values[0].abs().max(1.0);
        if s.values[0].is_finite() && (s.diameter() < opts.xtol || spread <= opts.ftol * scale) {
            return (s.points[0].clone(), s.values[0], true);
        }
        if *evals >= budget {
            return (s.points[0].clone(), s.values[0], false);
        }
        let mut centroid = vec![0.0; n];
        for p in &s.points[..n] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / nf;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&s.points[n])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };
        let xr = along(alpha);
        let fr = eval(&xr, evals);
        if fr < s.values[0] {
            let xe = along(alpha * gamma);
            let fe = eval(&xe, evals);
            if fe < fr {
                s.points[n] = xe;
                s.values[n] = fe;
            } else {
                s.points[n] = xr;
                s.values[n] = fr;
            }
        } else if fr < s.values[n - 1] {
            s.points[n] = xr;
            s.values[n] = fr;
        } else {
            let (xc, fc) = if fr < s.values[n] {
                let xc = along(alpha * rho);
                let fc = eval(&xc, evals);
                (xc, fc)
            } else {
                let xc = along(-rho);
                let fc = eval(&xc, evals);
                (xc, fc)
            };
            if fc < s.values[n].min(fr) {
                s.points[n] = xc;
                s.values[n] = fc;
            } else {
                let best = s.points[0].clone();
                for i in 1..=n {
                    let p: Vec<f64> = best
                        .iter()
                        .zip(&s.points[i])
                        .map(|(b, x)| b + sigma * (x - b))
                        .collect();
                    s.values[i] = eval(&p, evals);
                    s.points[i] = p;
                }
            }
        }
        s.sort();
        trace.push((*evals, s.values[0]));
    }
}

/// Restarted Nelder–Mead. The returned objective is never worse than the
/// objective at `start`.
pub fn minimize<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    start: &[f64],
    opts: &MinimizeOptions,
) -> MinimizeResult {
    let mut evals = 0;
    let mut trace = Vec::new();
    let f0 = clean(f(start));
    evals += 1;
    let mut best_x = start.to_vec();
    let mut best_f = f0;
    let mut converged = false;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for run in 0..opts.restarts.max(1) {
        let from: Vec<f64> = if run == 0 {
            start.to_vec()
        } else {
            best_x
                .iter()
                .map(|v| {
                    let m = 1.0 + opts.perturbation * (2.0 * rng.random::<f64>() - 1.0);
                    v * m
                })
                .collect()
        };
        let (x, fx, ok) = nelder_mead(&mut f, &from, opts, &mut evals, &mut trace);
        let improvement = best_f - fx;
        if fx < best_f {
            best_x = x;
            best_f = fx;
        }
        converged = ok;
        if run > 0 && ok && improvement <= opts.ftol * best_f.abs().max(1.0) {
            break;
        }
    }
    MinimizeResult {
        x: best_x,
        f: best_f,
        evals,
        converged,
        trace,
    }
}

/// Outcome of a likelihood fit, on the natural parameter scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: Vec<f64>,
    pub nll: f64,
    pub evaluations: usize,
    pub converged: bool,
    pub sigma_n2: f64,
    pub sigma_s2: f64,
}

/// Minimizes `nll_of(natural params)` over the transformed domain.
pub fn fit_transformed<F>(
    transforms: &[Transform],
    start_natural: &[f64],
    opts: &MinimizeOptions,
    mut nll_of: F,
) -> (Vec<f64>, MinimizeResult)
where
    F: FnMut(&[f64]) -> f64,
{
    let u0 = to_unconstrained(transforms, start_natural);
    let res = minimize(|u| nll_of(&to_natural(transforms, u)), &u0, opts);
    (to_natural(transforms, &res.x), res)
}
