//! Run configuration read from a TOML file.
//!
//! ```toml
//! seed = 1
//! output_dir = "out"
//! horizon = 48
//! post_sample_start = "2009-01-01"
//!
//! [data]
//! path = "load.csv"          # omit to generate from [synth]
//! calendar_overrides = "extra_days.csv"
//!
//! [synth]
//! years = 9
//!
//! [[models]]
//! kind = "hwt"
//!
//! [[models]]
//! kind = "hwt"
//! rule = "R3"
//!
//! [[combinations]]
//! models = ["rb-hwt-R3", "rb-sarma-R3"]
//! ```
//!
//! Only the output directory may be overridden from the environment, through
//! `LOADRULE_OUTPUT_DIR`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use loadrule_core::ann::{AnnConfig, DESK_HORIZONS};
use loadrule_core::eval::{BenchmarkKind, Subset};
use loadrule_core::rules::RuleId;
use loadrule_core::sarma::SarmaOrders;
use loadrule_core::synth::SynthConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{io_err, CliError, CliResult};

pub const OUTPUT_DIR_ENV: &str = "LOADRULE_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Hwt,
    Sarma,
    Svd,
    Ann,
    Srw,
    Sma4,
    RecentSunday,
}

impl ModelKind {
    pub fn benchmark(self) -> Option<BenchmarkKind> {
        match self {
            Self::Srw => Some(BenchmarkKind::SeasonalRandomWalk),
            Self::Sma4 => Some(BenchmarkKind::SeasonalMovingAverage4),
            Self::RecentSunday => Some(BenchmarkKind::RecentSunday),
            _ => None,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Hwt => "hwt",
            Self::Sarma => "sarma",
            Self::Svd => "svd",
            Self::Ann => "ann",
            Self::Srw => "srw",
            Self::Sma4 => "sma4",
            Self::RecentSunday => "recent-sunday",
        })
    }
}

/// One model of a run. Unset tuning fields take the library defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    /// Absent for the non-rule-based form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<RuleId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_evals: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    /// SARMA orders as `p,P1,P2,q,Q1,Q2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orders: Option<String>,
    /// SVD dimension; absent selects it on the final estimation year.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svd_k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svd_k_grid: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ann: Option<AnnSettings>,
}

impl ModelSpec {
    pub fn display_name(&self) -> String {
        if let Some(n) = &self.name {
            return n.clone();
        }
        match (self.kind.benchmark(), self.rule) {
            (Some(_), _) | (None, None) => self.kind.to_string(),
            (None, Some(r)) => format!("rb-{}-{r}", self.kind),
        }
    }

    pub fn sarma_orders(&self) -> CliResult<SarmaOrders> {
        match &self.orders {
            None => Ok(SarmaOrders::default()),
            Some(s) => s.parse().map_err(|e| CliError::Config(format!("orders '{s}': {e}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnSettings {
    pub horizons: Vec<usize>,
    pub hidden_units: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub l2_regularization: f64,
    pub epochs: usize,
    pub patience: usize,
    pub batch_size: usize,
    pub calendar_inputs: bool,
    /// Search the default grid instead of the single setting above.
    pub grid_search: bool,
}

impl Default for AnnSettings {
    fn default() -> Self {
        let c = AnnConfig::default();
        Self {
            horizons: DESK_HORIZONS.to_vec(),
            hidden_units: c.hidden_units,
            learning_rate: c.learning_rate,
            momentum: c.momentum,
            l2_regularization: c.l2_regularization,
            epochs: c.epochs,
            patience: c.patience,
            batch_size: c.batch_size,
            calendar_inputs: c.calendar_inputs,
            grid_search: false,
        }
    }
}

impl AnnSettings {
    pub fn config(&self, seed: u64) -> AnnConfig {
        AnnConfig {
            horizon: 1,
            hidden_units: self.hidden_units,
            learning_rate: self.learning_rate,
            momentum: self.momentum,
            l2_regularization: self.l2_regularization,
            epochs: self.epochs,
            patience: self.patience,
            batch_size: self.batch_size,
            calendar_inputs: self.calendar_inputs,
            seed,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calendar_overrides: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Combination {
    pub models: [String; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSection {
    pub period_horizons: Vec<usize>,
    pub period_subset: Subset,
}

impl Default for ReportSection {
    fn default() -> Self {
        Self { period_horizons: vec![12, 48], period_subset: Subset::Special }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub horizon: usize,
    /// First post-sample day; everything before it is estimation data.
    pub post_sample_start: NaiveDate,
    pub data: DataSection,
    pub synth: SynthConfig,
    pub models: Vec<ModelSpec>,
    pub combinations: Vec<Combination>,
    pub report: ReportSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            output_dir: PathBuf::from("out"),
            horizon: 48,
            post_sample_start: NaiveDate::from_ymd_opt(2009, 1, 1).expect("valid date"),
            data: DataSection::default(),
            synth: SynthConfig::default(),
            models: Vec::new(),
            combinations: Vec::new(),
            report: ReportSection::default(),
        }
    }
}

impl FromStr for RunConfig {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        toml::from_str(s).map_err(|e| CliError::Config(e.to_string()))
    }
}

impl RunConfig {
    /// Reads `path`, resolving relative data paths against its directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: Self = text.parse()?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.data.path, &mut cfg.data.calendar_overrides].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV) {
            cfg.output_dir = PathBuf::from(dir);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.horizon == 0 || self.horizon > 48 {
            return Err(CliError::Config(format!("horizon {} outside 1..=48", self.horizon)));
        }
        let mut names = std::collections::BTreeSet::new();
        for m in &self.models {
            let name = m.display_name();
            if name.is_empty() || name.contains(['/', '\\']) {
                return Err(CliError::Config(format!("invalid model name '{name}'")));
            }
            if !names.insert(name.clone()) {
                return Err(CliError::Config(format!("duplicate model name '{name}'")));
            }
            if m.kind == ModelKind::Sarma {
                m.sarma_orders()?.validate()?;
            }
            if let Some(a) = &m.ann {
                if a.horizons.is_empty() || a.horizons.iter().any(|h| *h == 0 || *h > 48) {
                    return Err(CliError::Config(format!("{name}: ANN horizons must lie in 1..=48")));
                }
            }
        }
        for c in &self.combinations {
            for n in &c.models {
                if !names.contains(n) {
                    return Err(CliError::Config(format!("combination refers to unknown model '{n}'")));
                }
            }
        }
        self.synth.validate()?;
        Ok(())
    }

    pub fn model(&self, name: &str) -> CliResult<&ModelSpec> {
        self.models
            .iter()
            .find(|m| m.display_name() == name)
            .ok_or_else(|| CliError::Config(format!("no model named '{name}' in the config")))
    }

    /// SHA-256 of the canonical TOML form, output directory excluded.
    pub fn hash(&self) -> String {
        let canonical = RunConfig { output_dir: PathBuf::new(), ..self.clone() };
        let text = toml::to_string(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn models_dir(&self) -> PathBuf {
        self.output_dir.join("models")
    }

    pub fn ensure_output_dir(&self) -> CliResult<()> {
        std::fs::create_dir_all(self.models_dir()).map_err(io_err(&self.output_dir))
    }
}
