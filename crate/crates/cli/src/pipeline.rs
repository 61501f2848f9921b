//! Data loading, fitting and model persistence shared by the commands.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use loadrule_core::ann::{self, AnnBundle, AnnForecaster, AnnGrid};
use loadrule_core::calendar::Calendar;
use loadrule_core::estimate::{FitResult, MinimizeOptions};
use loadrule_core::eval::{Benchmark, BenchmarkKind};
use loadrule_core::hwt::{self, HwtFitConfig, HwtModel, HwtParams, HwtState};
use loadrule_core::model::Forecaster;
use loadrule_core::rules::{AnnualLagTable, RuleId};
use loadrule_core::sarma::{self, SarmaFitConfig, SarmaModel, SarmaParams};
use loadrule_core::series::{LoadSeries, PeriodStamp, PERIODS_PER_DAY};
use loadrule_core::svdmodel::{self, SvdBasis, SvdFitConfig, SvdModel, SvdState, DEFAULT_K_GRID};
use loadrule_core::synth;
use serde::{Deserialize, Serialize};

use crate::config::{ModelKind, ModelSpec, RunConfig};
use crate::error::{io_err, CliError, CliResult};

const MODEL_FILE_VERSION: u32 = 1;
/// Minimum estimation span in days.
const MIN_ESTIMATION_DAYS: usize = 730;

/// The loaded series with its calendar and split point.
#[derive(Debug, Clone)]
pub struct RunData {
    pub series: LoadSeries,
    pub ys_log: Vec<f64>,
    pub calendar: Calendar,
    /// Offset of the first post-sample period.
    pub post_start: usize,
}

impl RunData {
    pub fn load(cfg: &RunConfig) -> CliResult<Self> {
        let series = match &cfg.data.path {
            Some(p) => LoadSeries::read_csv_path(p).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?,
            None => synth::generate(&cfg.synth)?.series,
        };
        let mut calendar = Calendar::great_britain();
        if let Some(p) = &cfg.data.calendar_overrides {
            calendar
                .read_overrides_path(p)
                .map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?;
        }
        let split = PeriodStamp::new(cfg.post_sample_start, 1);
        let offset = series.start().periods_until(split);
        if offset <= 0 || offset as usize >= series.len() {
            return Err(CliError::Config(format!(
                "post-sample start {} outside the data span {} .. {}",
                cfg.post_sample_start,
                series.start(),
                series.end()
            )));
        }
        let post_start = offset as usize;
        if post_start < MIN_ESTIMATION_DAYS * PERIODS_PER_DAY {
            return Err(CliError::Config(format!(
                "estimation span of {} days is shorter than {MIN_ESTIMATION_DAYS}",
                post_start / PERIODS_PER_DAY
            )));
        }
        let ys_log = series.log_view();
        Ok(Self { series, ys_log, calendar, post_start })
    }

    pub fn start(&self) -> PeriodStamp {
        self.series.start()
    }

    pub fn estimation(&self) -> &[f64] {
        &self.ys_log[..self.post_start]
    }

    /// Lag table over the data plus one day, for `rule` or for an all-normal
    /// calendar when `rule` is `None`.
    pub fn table(&self, rule: Option<RuleId>) -> CliResult<Arc<AnnualLagTable>> {
        let len = self.ys_log.len() + PERIODS_PER_DAY;
        let start = self.start();
        let table = match rule {
            Some(r) => AnnualLagTable::build(&self.calendar, r, start, len, start.date)?,
            None => AnnualLagTable::build(&Calendar::all_normal(), RuleId::R1, start, len, start.date)?,
        };
        let unusable = table.unusable_days();
        if !unusable.is_empty() {
            log::info!("{} days fall back to the normal annual lag for want of history", unusable.len());
        }
        Ok(Arc::new(table))
    }

    pub fn special_mask(&self) -> CliResult<Vec<bool>> {
        (0..self.ys_log.len())
            .map(|t| self.calendar.is_special(self.start().advance(t as i64).date).map_err(CliError::from))
            .collect()
    }
}

/// Fitted state of one model, as persisted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Fitted {
    Hwt { params: HwtParams, state: HwtState },
    Sarma { params: SarmaParams, burn_in: usize },
    Svd { basis: SvdBasis, params: HwtParams, state: SvdState },
    Ann { bundle: AnnBundle },
    Benchmark { benchmark: BenchmarkKind },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub version: u32,
    pub config_hash: String,
    pub name: String,
    pub spec: ModelSpec,
    pub estimation_len: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitResult>,
    pub model: Fitted,
}

impl ModelFile {
    pub fn path(dir: &Path, name: &str) -> PathBuf {
        dir.join(format!("{name}.json"))
    }

    pub fn save(&self, dir: &Path) -> CliResult<PathBuf> {
        let path = Self::path(dir, &self.name);
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Model(e.to_string()))?;
        std::fs::write(&path, text + "\n").map_err(io_err(&path))?;
        Ok(path)
    }

    pub fn load(dir: &Path, name: &str) -> CliResult<Self> {
        let path = Self::path(dir, name);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Model(format!("{}: {e} (run `fit` first)", path.display())))?;
        let file: Self = serde_json::from_str(&text).map_err(|e| CliError::Model(format!("{}: {e}", path.display())))?;
        if file.version != MODEL_FILE_VERSION {
            return Err(CliError::Model(format!("{}: unsupported version {}", path.display(), file.version)));
        }
        Ok(file)
    }
}

fn optimizer(spec: &ModelSpec, seed: u64) -> MinimizeOptions {
    let d = MinimizeOptions::default();
    MinimizeOptions {
        max_evals: spec.max_evals.unwrap_or(d.max_evals),
        restarts: spec.restarts.unwrap_or(d.restarts),
        seed,
        ..d
    }
}

/// Fits `spec` on the estimation slice only.
pub fn fit_model(cfg: &RunConfig, data: &RunData, spec: &ModelSpec) -> CliResult<ModelFile> {
    let name = spec.display_name();
    let ys = data.estimation();
    let start = data.start();
    log::info!("fitting {name} on {} observations", ys.len());
    let (model, fit) = match spec.kind {
        ModelKind::Hwt => {
            let table = data.table(spec.rule)?;
            let fc = HwtFitConfig { optimizer: optimizer(spec, cfg.seed), ..HwtFitConfig::default() };
            let (params, state, fit) = hwt::fit(ys, start, &table, &fc)?;
            (Fitted::Hwt { params, state }, Some(fit))
        }
        ModelKind::Sarma => {
            let table = data.table(spec.rule)?;
            let fc = SarmaFitConfig { optimizer: optimizer(spec, cfg.seed), ..SarmaFitConfig::default() };
            let (params, fit) = sarma::fit(ys, &spec.sarma_orders()?, &table, &fc)?;
            (Fitted::Sarma { params, burn_in: fc.burn_in }, Some(fit))
        }
        ModelKind::Svd => {
            let table = data.table(spec.rule)?;
            let mut fc = SvdFitConfig { optimizer: optimizer(spec, cfg.seed), ..SvdFitConfig::default() };
            fc.k = match spec.svd_k {
                Some(k) => k,
                None => {
                    let grid = spec.svd_k_grid.clone().unwrap_or_else(|| DEFAULT_K_GRID.to_vec());
                    let holdout = holdout_len(data)?;
                    let (k, scores) = svdmodel::select_k(ys, start, &table, &grid, holdout, &fc)?;
                    log::info!("{name}: SVD dimension {k} chosen from {scores:?}");
                    k
                }
            };
            let (basis, params, state, fit) = svdmodel::fit(ys, start, &table, &fc)?;
            (Fitted::Svd { basis, params, state }, Some(fit))
        }
        ModelKind::Ann => {
            let table = data.table(spec.rule)?;
            let settings = spec.ann.clone().unwrap_or_default();
            let base = settings.config(cfg.seed);
            let grid = settings.grid_search.then(AnnGrid::default);
            let models = ann::fit_horizons(ys, start, &table, &settings.horizons, holdout_len(data)?, &base, grid.as_ref())?;
            (Fitted::Ann { bundle: AnnBundle::new(start, models) }, None)
        }
        ModelKind::Srw | ModelKind::Sma4 | ModelKind::RecentSunday => {
            let benchmark = spec.kind.benchmark().expect("benchmark kind");
            (Fitted::Benchmark { benchmark }, None)
        }
    };
    Ok(ModelFile {
        version: MODEL_FILE_VERSION,
        config_hash: cfg.hash(),
        name,
        spec: spec.clone(),
        estimation_len: ys.len(),
        fit,
        model,
    })
}

/// Periods of the final estimation year.
fn holdout_len(data: &RunData) -> CliResult<usize> {
    let last = data.start().advance(data.post_start as i64 - 1).date;
    let year_before = last
        .checked_sub_months(chrono::Months::new(12))
        .ok_or_else(|| CliError::Data("estimation span too short for a hold-out year".into()))?;
    Ok((last - year_before).num_days() as usize * PERIODS_PER_DAY)
}

/// A forecaster positioned at the start of its replay.
pub fn forecaster(file: &ModelFile, data: &RunData) -> CliResult<Box<dyn Forecaster>> {
    let name = file.name.clone();
    Ok(match &file.model {
        Fitted::Hwt { params, state } => {
            Box::new(HwtModel::new(name, *params, state.clone(), data.table(file.spec.rule)?))
        }
        Fitted::Sarma { params, burn_in } => {
            Box::new(SarmaModel::new(name, params.clone(), data.table(file.spec.rule)?, *burn_in))
        }
        Fitted::Svd { basis, params, state } => Box::new(SvdModel::new(
            name,
            Arc::new(basis.clone()),
            *params,
            state.clone(),
            data.table(file.spec.rule)?,
        )),
        Fitted::Ann { bundle } => {
            Box::new(AnnForecaster::new(name, bundle.models.clone(), data.table(file.spec.rule)?, bundle.start))
        }
        Fitted::Benchmark { benchmark } => {
            Box::new(Benchmark::new(*benchmark, data.table(Some(RuleId::R1))?).with_name(name))
        }
    })
}

/// Fits every configured model and writes the model files.
pub fn fit_all(cfg: &RunConfig, data: &RunData) -> CliResult<BTreeMap<String, ModelFile>> {
    cfg.ensure_output_dir()?;
    let mut out = BTreeMap::new();
    for spec in &cfg.models {
        let file = fit_model(cfg, data, spec)?;
        file.save(&cfg.models_dir())?;
        out.insert(file.name.clone(), file);
    }
    Ok(out)
}
