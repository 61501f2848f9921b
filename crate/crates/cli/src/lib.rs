//! Command-line runs of the rule-based load forecasting models.
//!
//! Every command reads a [`config::RunConfig`] TOML file; flags override the
//! matching config fields. Exit codes: 0 success, 2 configuration error,
//! 3 data error, 4 model error.

pub mod commands;
pub mod config;
pub mod error;
pub mod pipeline;

use std::ffi::OsString;
use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use loadrule_core::rules::RuleId;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "loadrule", version, about = "Rule-based forecasting of normal and special-day load")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Run configuration file.
    #[arg(short, long)]
    pub config: PathBuf,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Load CSV replacing the configured data source.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub post_sample_start: Option<NaiveDate>,
    #[arg(long)]
    pub horizon: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic series and its special-day labels.
    Synth {
        #[command(flatten)]
        common: Common,
        /// Output CSV; defaults to synth.csv in the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit every configured model on the estimation sample.
    Fit {
        #[command(flatten)]
        common: Common,
    },
    /// Forecast from one origin with previously fitted models.
    Forecast {
        #[command(flatten)]
        common: Common,
        /// Origin as DATE:PERIOD, e.g. 2009-06-01:24.
        #[arg(long)]
        origin: String,
    },
    /// Fit, backtest over the post-sample data and write accuracy reports.
    Evaluate {
        #[command(flatten)]
        common: Common,
    },
    /// Average intraday load by weekday over the estimation sample.
    Profile {
        #[command(flatten)]
        common: Common,
    },
    /// Seasonal indices of a fitted HWT model.
    Indices {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: String,
    },
    /// Rule tables.
    Rules {
        #[command(subcommand)]
        action: RulesAction,
    },
    /// SVD diagnostics.
    Svd {
        #[command(subcommand)]
        action: SvdAction,
    },
    /// SARMA diagnostics.
    Sarma {
        #[command(subcommand)]
        action: SarmaAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum RulesAction {
    /// Per-period annual lags and matched dates.
    Dump {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "R3")]
        rule: RuleId,
        #[arg(long)]
        from: Option<NaiveDate>,
        #[arg(long)]
        to: Option<NaiveDate>,
    },
}

#[derive(Debug, Subcommand)]
pub enum SvdAction {
    /// Singular values of the normal-week matrix.
    Scree {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Subcommand)]
pub enum SarmaAction {
    /// Expanded lag polynomials of a fitted model at one period.
    Expand {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: String,
        /// Period as DATE:PERIOD.
        #[arg(long)]
        at: String,
    },
}

impl Common {
    pub fn load(&self) -> CliResult<RunConfig> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(d) = &self.output_dir {
            cfg.output_dir = d.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(p) = &self.data {
            cfg.data.path = Some(p.clone());
        }
        if let Some(d) = self.post_sample_start {
            cfg.post_sample_start = d;
        }
        if let Some(h) = self.horizon {
            cfg.horizon = h;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Runs a parsed command, returning the files written.
pub fn execute(cli: &Cli) -> CliResult<Vec<PathBuf>> {
    match &cli.command {
        Command::Synth { common, out } => commands::synth(&common.load()?, out.as_deref()),
        Command::Fit { common } => commands::fit(&common.load()?),
        Command::Forecast { common, origin } => {
            let cfg = common.load()?;
            commands::forecast(&cfg, commands::parse_stamp(origin)?, cfg.horizon)
        }
        Command::Evaluate { common } => Ok(commands::evaluate(&common.load()?)?.0),
        Command::Profile { common } => commands::profile(&common.load()?),
        Command::Indices { common, model } => commands::indices(&common.load()?, model),
        Command::Rules { action: RulesAction::Dump { common, rule, from, to } } => {
            commands::rules_dump(&common.load()?, *rule, *from, *to)
        }
        Command::Svd { action: SvdAction::Scree { common } } => commands::svd_scree(&common.load()?),
        Command::Sarma { action: SarmaAction::Expand { common, model, at } } => {
            commands::sarma_expand(&common.load()?, model, commands::parse_stamp(at)?)
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
/// Errors go to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            0
        }
        Err(e) => report_error(&e),
    }
}

fn report_error(e: &CliError) -> i32 {
    eprintln!("error: {e}");
    e.exit_code()
}
