//! Intrayear lag selection.
//!
//! Normal days look back 52 weeks (53 weeks just before a clock change when
//! 52 would cross it). Special days look back to a historical special day
//! chosen by one of four rules. Every lag is a whole number of days, so
//! leap years are handled by plain date subtraction.
//!
//! Matches for Rules 2–4 are drawn from earlier calendar years only and the
//! most recent qualifying day wins. When no qualifying day exists on or after
//! `history_start`, the rule falls back to Rule 1.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use chrono::{Datelike, Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::calendar::{after_summer_start, clock_change_dates, is_weekend, Calendar, CycleClass,
    SpecialDayKind, MIN_YEAR};
use crate::error::{Error, Result};
use crate::series::{PeriodStamp, PERIODS_PER_DAY, PERIODS_PER_WEEK};

/// 52 weeks in half-hours.
pub const NORMAL_LAG: usize = 52 * PERIODS_PER_WEEK;
/// 53 weeks in half-hours.
pub const LONG_NORMAL_LAG: usize = 53 * PERIODS_PER_WEEK;
/// Window either side of a clock change in which the 53-week lag may apply.
pub const CLOCK_CHANGE_WINDOW_DAYS: i64 = 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RuleId {
    R1,
    R2,
    R3,
    R4,
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::R1 => "R1",
            Self::R2 => "R2",
            Self::R3 => "R3",
            Self::R4 => "R4",
        };
        f.write_str(s)
    }
}

impl FromStr for RuleId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "R1" | "1" => Ok(Self::R1),
            "R2" | "2" => Ok(Self::R2),
            "R3" | "3" => Ok(Self::R3),
            "R4" | "4" => Ok(Self::R4),
            _ => Err(format!("unknown rule '{s}', expected R1..R4")),
        }
    }
}

/// A chosen historical day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LagChoice {
    pub matched: NaiveDate,
    pub lag_days: u32,
    /// The rule found no qualifying day and reverted to Rule 1.
    pub fallback: bool,
}

impl LagChoice {
    fn between(date: NaiveDate, matched: NaiveDate, fallback: bool) -> Self {
        let days = (date - matched).num_days();
        debug_assert!(days > 0);
        Self {
            matched,
            lag_days: days as u32,
            fallback,
        }
    }

    pub fn half_hours(&self) -> usize {
        self.lag_days as usize * PERIODS_PER_DAY
    }
}

/// Identity of "the same special day" across years. Proximity days are
/// identified by their date, everything else by kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DayKey {
    Kind(std::mem::Discriminant<SpecialDayKind>),
    MonthDay(u32, u32),
}

fn day_key(date: NaiveDate, kind: SpecialDayKind) -> DayKey {
    if kind.is_proximity() {
        DayKey::MonthDay(date.month(), date.day())
    } else {
        DayKey::Kind(std::mem::discriminant(&kind))
    }
}

/// Most recent special day in a year before `date`'s, on or after
/// `not_before`, satisfying `pred`.
fn search_back(
    cal: &Calendar,
    date: NaiveDate,
    not_before: NaiveDate,
    mut pred: impl FnMut(NaiveDate, SpecialDayKind) -> Result<bool>,
) -> Result<Option<NaiveDate>> {
    let floor = not_before.year().max(MIN_YEAR);
    for year in (floor..date.year()).rev() {
        for (d, k) in cal.special_days(year)?.into_iter().rev() {
            if d >= not_before && pred(d, k)? {
                return Ok(Some(d));
            }
        }
    }
    Ok(None)
}

fn kind_of(cal: &Calendar, date: NaiveDate) -> Result<SpecialDayKind> {
    cal.kind(date)?
        .ok_or_else(|| Error::ConfigInvalid(format!("{date} is not a special day")))
}

/// Normal-day lag in half-hours: 52 weeks, or 53 weeks when the date lies
/// within four weeks of a clock change and the 52-week-lagged date falls on
/// the other side of the previous year's clock change.
pub fn normal_lag(date: NaiveDate) -> Result<usize> {
    normal_lag_choice(date).map(|c| c.half_hours())
}

pub fn normal_lag_choice(date: NaiveDate) -> Result<LagChoice> {
    let (start, end) = clock_change_dates(date.year())?;
    let (prev_start, prev_end) = clock_change_dates(date.year() - 1)?;
    let lagged = date - Duration::days(364);
    for (cc, prev_cc) in [(start, prev_start), (end, prev_end)] {
        let dist = (date - cc).num_days();
        if (-CLOCK_CHANGE_WINDOW_DAYS..CLOCK_CHANGE_WINDOW_DAYS).contains(&dist)
            && (date >= cc) != (lagged >= prev_cc)
        {
            return Ok(LagChoice::between(date, date - Duration::days(371), false));
        }
    }
    Ok(LagChoice::between(date, lagged, false))
}

/// Rule 1: the same special day in the previous year.
pub fn rule1_lag(cal: &Calendar, date: NaiveDate) -> Result<LagChoice> {
    let kind = kind_of(cal, date)?;
    let key = day_key(date, kind);
    let found = search_back(cal, date, NaiveDate::from_ymd_opt(MIN_YEAR, 1, 1).unwrap(), |d, k| {
        Ok(day_key(d, k) == key)
    })?;
    found
        .map(|m| LagChoice::between(date, m, false))
        .ok_or_else(|| Error::InsufficientHistory(format!("no earlier {kind} before {date}")))
}

fn or_rule1(cal: &Calendar, date: NaiveDate, found: Option<NaiveDate>) -> Result<LagChoice> {
    match found {
        Some(m) => Ok(LagChoice::between(date, m, false)),
        None => rule1_lag(cal, date).map(|c| LagChoice { fallback: true, ..c }),
    }
}

/// Rule 2: the same special day on the same weekday. The Christmas period
/// is pooled into a single kind.
pub fn rule2_lag(cal: &Calendar, date: NaiveDate, history_start: NaiveDate) -> Result<LagChoice> {
    let kind = kind_of(cal, date)?;
    if kind.is_fixed_weekday() {
        return rule1_lag(cal, date);
    }
    let wd = date.weekday();
    let found = if kind.is_christmas_period() {
        search_back(cal, date, history_start, |d, k| {
            Ok(k.is_christmas_period() && d.weekday() == wd)
        })?
    } else {
        let key = day_key(date, kind);
        search_back(cal, date, history_start, |d, k| {
            Ok(day_key(d, k) == key && d.weekday() == wd)
        })?
    };
    or_rule1(cal, date, found)
}

#[derive(Clone, Copy)]
enum DayMatch {
    WeekendStatus,
    CycleClass,
}

impl DayMatch {
    fn same(self, a: NaiveDate, b: NaiveDate) -> bool {
        match self {
            Self::WeekendStatus => is_weekend(a) == is_weekend(b),
            Self::CycleClass => CycleClass::of(a.weekday()) == CycleClass::of(b.weekday()),
        }
    }
}

fn rule34_lag(
    cal: &Calendar,
    date: NaiveDate,
    history_start: NaiveDate,
    how: DayMatch,
) -> Result<LagChoice> {
    let kind = kind_of(cal, date)?;
    if kind.is_bank_holiday_monday() {
        return rule1_lag(cal, date);
    }
    let found = if kind.is_easter() {
        let key = day_key(date, kind);
        let side = after_summer_start(date)?;
        search_back(cal, date, history_start, |d, k| {
            Ok(day_key(d, k) == key && after_summer_start(d)? == side)
        })?
    } else if let SpecialDayKind::ProximityDay { side, bridging } = kind {
        search_back(cal, date, history_start, |d, k| {
            Ok(matches!(k, SpecialDayKind::ProximityDay { side: s, bridging: b }
                if s == side && b == bridging)
                && how.same(d, date))
        })?
    } else if kind.is_fixed_weekday() {
        // Fixed-weekday days added through overrides.
        return rule1_lag(cal, date);
    } else {
        let key = day_key(date, kind);
        search_back(cal, date, history_start, |d, k| {
            Ok(day_key(d, k) == key && how.same(d, date))
        })?
    };
    or_rule1(cal, date, found)
}

/// Rule 3: weekday/weekend matching for fixed-date days, clock-change side
/// for Easter days, side/weekend/bridging for proximity days.
pub fn rule3_lag(cal: &Calendar, date: NaiveDate, history_start: NaiveDate) -> Result<LagChoice> {
    rule34_lag(cal, date, history_start, DayMatch::WeekendStatus)
}

/// Rule 4: Rule 3 with intraday cycle class replacing weekend status.
pub fn rule4_lag(cal: &Calendar, date: NaiveDate, history_start: NaiveDate) -> Result<LagChoice> {
    rule34_lag(cal, date, history_start, DayMatch::CycleClass)
}

pub fn special_lag(
    cal: &Calendar,
    rule: RuleId,
    date: NaiveDate,
    history_start: NaiveDate,
) -> Result<LagChoice> {
    match rule {
        RuleId::R1 => rule1_lag(cal, date),
        RuleId::R2 => rule2_lag(cal, date, history_start),
        RuleId::R3 => rule3_lag(cal, date, history_start),
        RuleId::R4 => rule4_lag(cal, date, history_start),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LagEntry {
    pub date: NaiveDate,
    pub kind: Option<SpecialDayKind>,
    pub choice: LagChoice,
}

impl LagEntry {
    pub fn is_special(&self) -> bool {
        self.kind.is_some()
    }
}

/// Per-day intrayear lags over a series span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnualLagTable {
    start: PeriodStamp,
    rule: RuleId,
    entries: Vec<LagEntry>,
}

impl AnnualLagTable {
    /// Lags for every day from `start.date` covering `len` periods.
    /// `history_start` bounds how far back Rules 2–4 may search.
    pub fn build(
        cal: &Calendar,
        rule: RuleId,
        start: PeriodStamp,
        len: usize,
        history_start: NaiveDate,
    ) -> Result<Self> {
        let last = start.advance(len.saturating_sub(1) as i64).date;
        let mut entries = Vec::new();
        let mut d = start.date;
        while d <= last {
            let kind = cal.kind(d)?;
            let choice = match kind {
                Some(_) => match special_lag(cal, rule, d, history_start) {
                    Ok(c) => c,
                    // A special day with no earlier occurrence at all; only
                    // reachable with override-only kinds.
                    Err(Error::InsufficientHistory(_)) => normal_lag_choice(d)?,
                    Err(e) => return Err(e),
                },
                None => normal_lag_choice(d)?,
            };
            entries.push(LagEntry { date: d, kind, choice });
            d += Duration::days(1);
        }
        Ok(Self { start, rule, entries })
    }

    /// Table from explicit per-day entries, starting at `start`'s date.
    pub fn from_entries(start: PeriodStamp, rule: RuleId, entries: Vec<LagEntry>) -> Self {
        Self { start, rule, entries }
    }

    /// Every day gets the same lag; `special` marks special days.
    pub fn constant(start: PeriodStamp, days: usize, lag_days: u32, special: &[bool]) -> Self {
        let entries = (0..days)
            .map(|i| {
                let date = start.date + Duration::days(i as i64);
                LagEntry {
                    date,
                    kind: special
                        .get(i)
                        .copied()
                        .unwrap_or(false)
                        .then_some(SpecialDayKind::ChristmasDay),
                    choice: LagChoice::between(date, date - Duration::days(lag_days as i64), false),
                }
            })
            .collect();
        Self::from_entries(start, RuleId::R1, entries)
    }

    pub fn rule(&self) -> RuleId {
        self.rule
    }

    pub fn start(&self) -> PeriodStamp {
        self.start
    }

    pub fn entries(&self) -> &[LagEntry] {
        &self.entries
    }

    /// Number of periods covered.
    pub fn len(&self) -> usize {
        self.entries.len() * PERIODS_PER_DAY - (self.start.period as usize - 1)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn day_index(&self, offset: usize) -> usize {
        (offset + self.start.period as usize - 1) / PERIODS_PER_DAY
    }

    pub fn entry_at(&self, offset: usize) -> &LagEntry {
        &self.entries[self.day_index(offset)]
    }

    pub fn entry_for(&self, date: NaiveDate) -> Option<&LagEntry> {
        let i = (date - self.start.date).num_days();
        (i >= 0).then(|| self.entries.get(i as usize)).flatten()
    }

    /// m₃ at `offset`, in half-hours.
    pub fn lag_at(&self, offset: usize) -> usize {
        self.entry_at(offset).choice.half_hours()
    }

    pub fn is_special_at(&self, offset: usize) -> bool {
        self.entry_at(offset).is_special()
    }

    /// The lagged offset, when it lies inside the span.
    pub fn resolve(&self, offset: usize) -> Option<usize> {
        offset.checked_sub(self.lag_at(offset))
    }

    /// Day-type mask per period: `true` on special days.
    pub fn special_mask(&self, len: usize) -> Vec<bool> {
        (0..len).map(|t| self.is_special_at(t)).collect()
    }

    pub fn has_special_days(&self) -> bool {
        self.entries.iter().any(LagEntry::is_special)
    }

    /// Three nested annual lags `(m₃(t), + m₃(t − L_A), + m₃(t − L_B))`;
    /// a lag is `None` once a nested lookup leaves the span.
    pub fn nested_lags(&self, offset: usize) -> [Option<usize>; 3] {
        let mut out = [None; 3];
        let mut total = 0usize;
        for slot in &mut out {
            let Some(pos) = offset.checked_sub(total) else {
                break;
            };
            if self.day_index(pos) >= self.entries.len() {
                break;
            }
            total += self.lag_at(pos);
            *slot = Some(total);
        }
        out
    }

    /// Days whose lag points before the span start.
    pub fn unusable_days(&self) -> Vec<NaiveDate> {
        self.entries
            .iter()
            .filter(|e| e.choice.matched < self.start.date)
            .map(|e| e.date)
            .collect()
    }

    /// Audit dump: `date,period,lag,matched_date` for every period in
    /// `[from, to]`.
    pub fn dump_csv<W: Write>(&self, from: NaiveDate, to: NaiveDate, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["date", "period", "lag", "matched_date"])?;
        for e in self.entries.iter().filter(|e| e.date >= from && e.date <= to) {
            for p in 1..=PERIODS_PER_DAY {
                w.write_record([
                    e.date.to_string(),
                    p.to_string(),
                    e.choice.half_hours().to_string(),
                    e.choice.matched.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}
