//! Seeded synthetic half-hourly load with triple seasonality and
//! special-day suppression.
//!
//! Log-load is the sum of a base level, a cycle-class intraday profile, a
//! weekend depression, an annual cosine, a summertime evening reduction, a
//! linear drift, AR(1) noise and, on special days, the log of a
//! multiplicative suppression shaped over the day. Suppressions depend on
//! the kind of special day, on whether it falls on a weekend, on Monday or
//! Friday, on the distance to Christmas for days preceding it, and on the
//! bridging status of proximity days.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::calendar::{after_summer_start, Bridging, Calendar, CycleClass, ProximitySide, SpecialDayKind};
use crate::error::{Error, Result};
use crate::series::{LoadSeries, PeriodStamp, PERIODS_PER_DAY};

/// Suppression factors for one family of special days.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecialEffect {
    /// A kind name such as `ChristmasDay`, or `ProximityDay:PrecedesChristmas`
    /// / `ProximityDay:FollowsBoxing` for proximity days of either bridging
    /// class.
    pub kind: String,
    /// Multiplicative suppression at the deepest point of a weekday.
    pub weekday: f64,
    pub weekend: f64,
}

impl SpecialEffect {
    fn new(kind: &str, weekday: f64, weekend: f64) -> Self {
        Self { kind: kind.to_string(), weekday, weekend }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub start: NaiveDate,
    pub years: u32,
    pub base_level_mw: f64,
    /// Log-scale intraday swing per cycle class, Monday first.
    pub intraday_amplitude: [f64; 5],
    /// Hour of the morning rise per cycle class.
    pub morning_rise_hour: [f64; 5],
    /// Log-scale height of the evening peak per cycle class.
    pub evening_peak: [f64; 5],
    /// Fractional weekend depression.
    pub weekend_depression: f64,
    /// Log-scale annual amplitude.
    pub annual_amplitude: f64,
    /// Day of year of the annual peak.
    pub annual_peak_day: f64,
    /// Log-scale reduction of the evening peak during summertime.
    pub summertime_evening_reduction: f64,
    pub special_effects: Vec<SpecialEffect>,
    /// Extra multiplicative suppression on bridging proximity days.
    pub bridging_extra: f64,
    /// Scale of the log-suppression on Fridays and Mondays.
    pub friday_depth: f64,
    pub monday_depth: f64,
    pub noise_ar: f64,
    pub noise_sd: f64,
    /// Log-scale drift per year.
    pub drift_per_year: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            start: NaiveDate::from_ymd_opt(2001, 1, 1).expect("valid date"),
            years: 9,
            base_level_mw: 35_000.0,
            intraday_amplitude: [1.0, 1.0, 0.97, 0.85, 0.8],
            morning_rise_hour: [6.9, 6.5, 6.5, 8.0, 8.6],
            evening_peak: [0.08, 0.08, 0.05, 0.04, 0.07],
            weekend_depression: 0.08,
            annual_amplitude: 0.2,
            annual_peak_day: 15.0,
            summertime_evening_reduction: 0.04,
            special_effects: vec![
                SpecialEffect::new("NewYearsDay", 0.80, 0.90),
                SpecialEffect::new("DayAfterNewYear", 0.90, 0.96),
                SpecialEffect::new("GoodFriday", 0.85, 0.85),
                SpecialEffect::new("EasterMonday", 0.85, 0.85),
                SpecialEffect::new("EarlyMayBankHoliday", 0.90, 0.90),
                SpecialEffect::new("SpringBankHoliday", 0.90, 0.90),
                SpecialEffect::new("SummerBankHoliday", 0.90, 0.90),
                SpecialEffect::new("ChristmasDay", 0.75, 0.82),
                SpecialEffect::new("BoxingDay", 0.80, 0.86),
                SpecialEffect::new("ProximityDay:PrecedesChristmas", 0.92, 0.93),
                SpecialEffect::new("ProximityDay:FollowsBoxing", 0.90, 0.94),
                SpecialEffect::new("OtherChristmasPeriod", 0.88, 0.93),
            ],
            bridging_extra: 0.92,
            friday_depth: 0.9,
            monday_depth: 1.05,
            noise_ar: 0.9,
            noise_sd: 0.01,
            drift_per_year: 0.01,
            seed: 20_090_101,
        }
    }
}

fn effect_key(kind: SpecialDayKind) -> String {
    match kind {
        SpecialDayKind::ProximityDay { side: ProximitySide::PrecedesChristmas, .. } => "ProximityDay:PrecedesChristmas".into(),
        SpecialDayKind::ProximityDay { side: ProximitySide::FollowsBoxing, .. } => "ProximityDay:FollowsBoxing".into(),
        other => other.to_string(),
    }
}

const EFFECT_KEYS: [&str; 12] = [
    "NewYearsDay",
    "DayAfterNewYear",
    "GoodFriday",
    "EasterMonday",
    "EarlyMayBankHoliday",
    "SpringBankHoliday",
    "SummerBankHoliday",
    "ChristmasDay",
    "BoxingDay",
    "ProximityDay:PrecedesChristmas",
    "ProximityDay:FollowsBoxing",
    "OtherChristmasPeriod",
];

fn in_unit(v: f64) -> bool {
    v > 0.0 && v <= 1.0
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::ConfigInvalid(m));
        if self.years < 3 {
            return bad(format!("synthetic series needs at least 3 years, got {}", self.years));
        }
        if !(self.base_level_mw.is_finite() && self.base_level_mw > 0.0) {
            return bad("base level must be positive".into());
        }
        if !(self.noise_ar > -1.0 && self.noise_ar < 1.0) {
            return bad("noise AR coefficient must lie in (-1, 1)".into());
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return bad("noise sd must be non-negative".into());
        }
        if !(0.0..1.0).contains(&self.weekend_depression) || !in_unit(self.bridging_extra) {
            return bad("weekend depression and bridging suppression must lie in (0, 1]".into());
        }
        if !(self.friday_depth >= 0.0 && self.monday_depth >= 0.0) {
            return bad("depth multipliers must be non-negative".into());
        }
        for e in &self.special_effects {
            if !EFFECT_KEYS.contains(&e.kind.as_str()) {
                return bad(format!("unknown special effect kind '{}'", e.kind));
            }
            if !in_unit(e.weekday) || !in_unit(e.weekend) {
                return bad(format!("suppressions for {} must lie in (0, 1]", e.kind));
            }
        }
        Ok(())
    }

    fn effects(&self) -> BTreeMap<String, &SpecialEffect> {
        self.special_effects.iter().map(|e| (e.kind.clone(), e)).collect()
    }

    /// Deterministic log-load at a date and period, excluding noise.
    fn deterministic(&self, date: NaiveDate, period: usize, kind: Option<SpecialDayKind>, effects: &BTreeMap<String, &SpecialEffect>) -> Result<f64> {
        let class = CycleClass::of(date.weekday());
        let ci = CycleClass::ALL.iter().position(|c| *c == class).expect("class listed");
        let hour = (period as f64 - 0.5) / 2.0;
        let sigmoid = |x: f64| 1.0 / (1.0 + (-x).exp());
        let evening = (-((hour - 18.0) / 1.5).powi(2)).exp();
        let summer = after_summer_start(date)?;
        let mut v = self.base_level_mw.ln();
        v += self.intraday_amplitude[ci]
            * (-0.2 + 0.35 * sigmoid((hour - self.morning_rise_hour[ci]) / 0.6) - 0.3 * sigmoid((hour - 22.5) / 0.8));
        v += self.evening_peak[ci] * evening;
        if summer {
            v -= self.summertime_evening_reduction * evening;
        }
        if class.is_weekend() {
            v += (1.0 - self.weekend_depression).ln();
        }
        let doy = date.ordinal0() as f64;
        v += self.annual_amplitude * (std::f64::consts::TAU * (doy - self.annual_peak_day) / 365.25).cos();
        let years = (date - self.start).num_days() as f64 / 365.25;
        v += self.drift_per_year * years;
        if let Some(kind) = kind {
            v += self.special_log_effect(date, kind, effects) * (0.5 + 0.5 * (-((hour - 13.0) / 5.0).powi(2)).exp());
        }
        Ok(v)
    }

    /// Log of the suppression at its deepest point of the day.
    fn special_log_effect(&self, date: NaiveDate, kind: SpecialDayKind, effects: &BTreeMap<String, &SpecialEffect>) -> f64 {
        let Some(e) = effects.get(&effect_key(kind)) else {
            return 0.0;
        };
        let wd = date.weekday();
        let weekend = matches!(wd, Weekday::Sat | Weekday::Sun);
        let mut depth = if weekend { e.weekend.ln() } else { e.weekday.ln() };
        match wd {
            Weekday::Fri => depth *= self.friday_depth,
            Weekday::Mon => depth *= self.monday_depth,
            _ => {}
        }
        if let SpecialDayKind::ProximityDay { side, bridging } = kind {
            if side == ProximitySide::PrecedesChristmas {
                // Deepens towards Christmas Eve.
                depth *= [0.75, 0.8, 0.9, 1.0][(date.day() as usize).clamp(21, 24) - 21];
            }
            if bridging == Bridging::Bridging {
                depth += self.bridging_extra.ln();
            }
        }
        depth
    }
}

/// Generated series with its ground-truth special-day labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Synthetic {
    pub series: LoadSeries,
    pub labels: Vec<(NaiveDate, SpecialDayKind)>,
}

impl Synthetic {
    /// Writes `date,kind` rows.
    pub fn write_labels_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["date", "kind"])?;
        for (d, k) in &self.labels {
            w.write_record([d.to_string(), k.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_labels_csv_path(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_labels_csv(std::fs::File::create(path)?)
    }
}

/// Last date covered by a config: `years` calendar years from `start`.
pub fn end_date(cfg: &SynthConfig) -> NaiveDate {
    let y = cfg.start.year() + cfg.years as i32;
    cfg.start
        .with_year(y)
        .unwrap_or_else(|| NaiveDate::from_ymd_opt(y, 3, 1).expect("valid date"))
        - Duration::days(1)
}

pub fn generate(cfg: &SynthConfig) -> Result<Synthetic> {
    cfg.validate()?;
    let cal = Calendar::great_britain();
    let effects = cfg.effects();
    let end = end_date(cfg);
    let days = (end - cfg.start).num_days() as usize + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let innovation = Normal::new(0.0, cfg.noise_sd.max(f64::MIN_POSITIVE)).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
    let stationary_sd = cfg.noise_sd / (1.0 - cfg.noise_ar * cfg.noise_ar).sqrt();
    let mut noise = if cfg.noise_sd > 0.0 {
        Normal::new(0.0, stationary_sd).map_err(|e| Error::ConfigInvalid(e.to_string()))?.sample(&mut rng)
    } else {
        0.0
    };
    let mut values = Vec::with_capacity(days * PERIODS_PER_DAY);
    let mut labels = Vec::new();
    for d in 0..days {
        let date = cfg.start + Duration::days(d as i64);
        let kind = cal.kind(date)?;
        if let Some(k) = kind {
            labels.push((date, k));
        }
        for p in 1..=PERIODS_PER_DAY {
            if cfg.noise_sd > 0.0 {
                noise = cfg.noise_ar * noise + innovation.sample(&mut rng);
            }
            values.push((cfg.deterministic(date, p, kind, &effects)? + noise).exp());
        }
    }
    let series = LoadSeries::new("synthetic", PeriodStamp::new(cfg.start, 1), values)?;
    Ok(Synthetic { series, labels })
}
