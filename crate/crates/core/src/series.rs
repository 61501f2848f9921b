//! Half-hourly time indexing and load series storage.
//!
//! Every day has exactly 48 periods. Raw feeds whose clock-change days carry
//! 46 or 50 periods must be normalized before ingestion.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Periods per day.
pub const PERIODS_PER_DAY: usize = 48;
/// Periods per week.
pub const PERIODS_PER_WEEK: usize = 336;

/// A half-hour slot: calendar date plus period of day in `1..=48`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PeriodStamp {
    pub date: NaiveDate,
    pub period: u8,
}

impl PeriodStamp {
    /// Panics if `period` is outside `1..=48`.
    pub fn new(date: NaiveDate, period: u8) -> Self {
        assert!(
            (1..=48).contains(&period),
            "period {period} outside 1..=48"
        );
        Self { date, period }
    }

    pub fn try_new(date: NaiveDate, period: u32) -> Option<Self> {
        (1..=48)
            .contains(&period)
            .then(|| Self::new(date, period as u8))
    }

    /// Absolute half-hour count since 0001-01-01 period 1.
    fn absolute(self) -> i64 {
        i64::from(self.date.num_days_from_ce()) * 48 + i64::from(self.period) - 1
    }

    fn from_absolute(abs: i64) -> Self {
        let days = abs.div_euclid(48);
        let period = abs.rem_euclid(48) as u8 + 1;
        let date = NaiveDate::from_num_days_from_ce_opt(days as i32)
            .expect("stamp arithmetic left the supported date range");
        Self { date, period }
    }

    /// The stamp `k` half-hours later (earlier when `k < 0`).
    pub fn advance(self, k: i64) -> Self {
        Self::from_absolute(self.absolute() + k)
    }

    /// Signed number of half-hours from `self` to `other`.
    pub fn periods_until(self, other: PeriodStamp) -> i64 {
        other.absolute() - self.absolute()
    }

    /// Period of the week, Monday period 1 = 1 through Sunday period 48 = 336.
    pub fn period_of_week(self) -> usize {
        self.date.weekday().num_days_from_monday() as usize * PERIODS_PER_DAY
            + self.period as usize
    }
}

impl fmt::Display for PeriodStamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.date, self.period)
    }
}

/// Free-function form of [`PeriodStamp::advance`].
pub fn advance(stamp: PeriodStamp, k: i64) -> PeriodStamp {
    stamp.advance(k)
}

/// Free-function form of [`PeriodStamp::period_of_week`].
pub fn period_of_week(stamp: PeriodStamp) -> usize {
    stamp.period_of_week()
}

/// Offset in half-hours from the start of a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SeriesIndex(pub usize);

/// Contiguous half-hourly load in MW, strictly positive, without gaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadSeries {
    start: PeriodStamp,
    values: Vec<f64>,
    name: String,
}

impl LoadSeries {
    pub fn new(name: impl Into<String>, start: PeriodStamp, values: Vec<f64>) -> Result<Self> {
        if let Some((i, &v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| **v <= 0.0 || !v.is_finite())
        {
            return Err(Error::NonPositiveValue {
                location: start.advance(i as i64).to_string(),
                value: v,
            });
        }
        Ok(Self {
            start,
            values,
            name: name.into(),
        })
    }

    pub fn start(&self) -> PeriodStamp {
        self.start
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn stamp_at(&self, index: usize) -> PeriodStamp {
        self.start.advance(index as i64)
    }

    /// Last covered stamp. Panics on an empty series.
    pub fn end(&self) -> PeriodStamp {
        self.stamp_at(self.len() - 1)
    }

    pub fn index_of(&self, stamp: PeriodStamp) -> Option<SeriesIndex> {
        let d = self.start.periods_until(stamp);
        (d >= 0 && (d as usize) < self.len()).then_some(SeriesIndex(d as usize))
    }

    pub fn get(&self, index: SeriesIndex) -> Option<f64> {
        self.values.get(index.0).copied()
    }

    /// Natural-log view of the load.
    pub fn log_view(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.ln()).collect()
    }

    /// Sub-series covering `[from, to)` in offsets.
    pub fn slice(&self, from: usize, to: usize) -> LoadSeries {
        LoadSeries {
            start: self.stamp_at(from),
            values: self.values[from..to].to_vec(),
            name: self.name.clone(),
        }
    }

    /// Sub-series covering whole days `first..=last`.
    pub fn slice_dates(&self, first: NaiveDate, last: NaiveDate) -> Result<LoadSeries> {
        let from = self
            .index_of(PeriodStamp::new(first, 1))
            .ok_or(Error::DateNotCovered(first))?;
        let to = self
            .index_of(PeriodStamp::new(last, 48))
            .ok_or(Error::DateNotCovered(last))?;
        Ok(self.slice(from.0, to.0 + 1))
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["date", "period", "load_mw"])?;
        for (i, v) in self.values.iter().enumerate() {
            let s = self.stamp_at(i);
            w.write_record([s.date.to_string(), s.period.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    /// Parses `date,period,load_mw` rows. Lines starting with `#` are skipped.
    pub fn read_csv<R: Read>(name: impl Into<String>, reader: R) -> Result<LoadSeries> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut start: Option<PeriodStamp> = None;
        let mut prev: Option<PeriodStamp> = None;
        let mut values = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            // Row numbers are 1-based data rows, header excluded.
            let row = i + 1;
            let rec = rec.map_err(|e| Error::Parse {
                row,
                message: e.to_string(),
            })?;
            if rec.len() != 3 {
                return Err(Error::Parse {
                    row,
                    message: format!("expected 3 fields, found {}", rec.len()),
                });
            }
            let date = NaiveDate::parse_from_str(&rec[0], "%Y-%m-%d").map_err(|e| {
                Error::Parse {
                    row,
                    message: format!("bad date '{}': {e}", &rec[0]),
                }
            })?;
            let period: u32 = rec[1].parse().map_err(|e| Error::Parse {
                row,
                message: format!("bad period '{}': {e}", &rec[1]),
            })?;
            let stamp = PeriodStamp::try_new(date, period).ok_or_else(|| Error::Parse {
                row,
                message: format!("period {period} outside 1..=48"),
            })?;
            let load: f64 = rec[2].parse().map_err(|e| Error::Parse {
                row,
                message: format!("bad load '{}': {e}", &rec[2]),
            })?;
            if load <= 0.0 || !load.is_finite() {
                return Err(Error::NonPositiveValue {
                    location: format!("row {row} ({stamp})"),
                    value: load,
                });
            }
            if let Some(p) = prev {
                if stamp <= p {
                    return Err(Error::NonMonotonic {
                        row,
                        previous: p.to_string(),
                        found: stamp.to_string(),
                    });
                }
                let expected = p.advance(1);
                if stamp != expected {
                    return Err(Error::GapDetected {
                        row,
                        expected: expected.to_string(),
                        found: stamp.to_string(),
                    });
                }
            } else {
                start = Some(stamp);
            }
            prev = Some(stamp);
            values.push(load);
        }
        let start = start.ok_or_else(|| Error::Parse {
            row: 0,
            message: "no data rows".into(),
        })?;
        LoadSeries::new(name, start, values)
    }

    pub fn read_csv_path(path: impl AsRef<Path>) -> Result<LoadSeries> {
        let path = path.as_ref();
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let f = std::fs::File::open(path)?;
        Self::read_csv(name, std::io::BufReader::new(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    #[test]
    fn advance_crosses_leap_day() {
        let s = PeriodStamp::new(d(2008, 2, 28), 48);
        assert_eq!(s.advance(1), PeriodStamp::new(d(2008, 2, 29), 1));
    }

    #[test]
    fn advance_six_years_back_from_new_year_2008() {
        let s = PeriodStamp::new(d(2008, 1, 1), 1);
        let k = -((5 * 365 + 366) * 48);
        assert_eq!(s.advance(k), PeriodStamp::new(d(2002, 1, 1), 1));
    }

    #[test]
    fn advance_zero_is_identity() {
        let s = PeriodStamp::new(d(2003, 7, 9), 17);
        assert_eq!(s.advance(0), s);
    }

    #[test]
    fn period_of_week_anchors() {
        // 2008-01-07 is a Monday.
        assert_eq!(PeriodStamp::new(d(2008, 1, 7), 1).period_of_week(), 1);
        assert_eq!(PeriodStamp::new(d(2008, 1, 13), 48).period_of_week(), 336);
        assert_eq!(PeriodStamp::new(d(2008, 1, 9), 10).period_of_week(), 106);
    }

    #[test]
    fn log_view_values() {
        let s = LoadSeries::new(
            "x",
            PeriodStamp::new(d(2001, 1, 1), 1),
            vec![1.0, std::f64::consts::E, std::f64::consts::E.powi(2)],
        )
        .unwrap();
        let l = s.log_view();
        assert_eq!(l[0], 0.0);
        assert!((l[1] - 1.0).abs() < 1e-15);
        assert!((l[2] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_positive() {
        let r = LoadSeries::new("x", PeriodStamp::new(d(2001, 1, 1), 1), vec![1.0, 0.0]);
        assert!(matches!(r, Err(Error::NonPositiveValue { .. })));
    }

    fn csv_text(rows: &[(&str, u32, &str)]) -> String {
        let mut s = String::from("date,period,load_mw\n");
        for (d, p, v) in rows {
            s.push_str(&format!("{d},{p},{v}\n"));
        }
        s
    }

    #[test]
    fn read_two_days() {
        let mut s = String::from("date,period,load_mw\n");
        for day in ["2005-03-01", "2005-03-02"] {
            for p in 1..=48 {
                s.push_str(&format!("{day},{p},{}\n", 30000 + p));
            }
        }
        let series = LoadSeries::read_csv("t", s.as_bytes()).unwrap();
        assert_eq!(series.len(), 96);
        assert_eq!(series.end(), PeriodStamp::new(d(2005, 3, 2), 48));
    }

    #[test]
    fn read_duplicate_is_non_monotonic() {
        let s = csv_text(&[("2005-03-01", 1, "1"), ("2005-03-01", 1, "2")]);
        let e = LoadSeries::read_csv("t", s.as_bytes()).unwrap_err();
        assert!(matches!(e, Error::NonMonotonic { row: 2, .. }), "{e}");
    }

    #[test]
    fn read_zero_load() {
        let s = csv_text(&[("2005-03-01", 1, "1"), ("2005-03-01", 2, "0")]);
        let e = LoadSeries::read_csv("t", s.as_bytes()).unwrap_err();
        assert!(matches!(e, Error::NonPositiveValue { .. }), "{e}");
    }

    #[test]
    fn read_gap() {
        let s = csv_text(&[("2005-03-01", 1, "1"), ("2005-03-01", 3, "2")]);
        let e = LoadSeries::read_csv("t", s.as_bytes()).unwrap_err();
        assert!(matches!(e, Error::GapDetected { row: 2, .. }), "{e}");
    }

    #[test]
    fn read_bad_period() {
        let s = csv_text(&[("2005-03-01", 49, "1")]);
        let e = LoadSeries::read_csv("t", s.as_bytes()).unwrap_err();
        assert!(matches!(e, Error::Parse { row: 1, .. }), "{e}");
    }

    fn stamp_strategy() -> impl Strategy<Value = PeriodStamp> {
        (1950i32..2150, 1u32..=365, 1u8..=48).prop_map(|(y, doy, p)| {
            PeriodStamp::new(NaiveDate::from_yo_opt(y, doy).unwrap(), p)
        })
    }

    proptest! {
        #[test]
        fn advance_is_group_action(s in stamp_strategy(), a in -200_000i64..200_000, b in -200_000i64..200_000) {
            prop_assert_eq!(s.advance(a).advance(b), s.advance(a + b));
        }

        #[test]
        fn advance_day_keeps_period(s in stamp_strategy()) {
            let n = s.advance(48);
            prop_assert_eq!(n.period, s.period);
            prop_assert_eq!(n.date, s.date.succ_opt().unwrap());
        }

        #[test]
        fn week_periodicity(s in stamp_strategy()) {
            prop_assert_eq!(s.advance(336).period_of_week(), s.period_of_week());
        }

        #[test]
        fn csv_round_trip(vals in proptest::collection::vec(1.0f64..1e5, 1..200), s in stamp_strategy()) {
            let series = LoadSeries::new("rt", s, vals).unwrap();
            let mut buf = Vec::new();
            series.write_csv(&mut buf).unwrap();
            let back = LoadSeries::read_csv("rt", buf.as_slice()).unwrap();
            prop_assert_eq!(back, series);
        }

        #[test]
        fn exp_log_round_trip(vals in proptest::collection::vec(1e-3f64..1e6, 1..50)) {
            let series = LoadSeries::new("x", PeriodStamp::new(NaiveDate::from_ymd_opt(2001,1,1).unwrap(), 1), vals.clone()).unwrap();
            for (l, v) in series.log_view().iter().zip(&vals) {
                prop_assert!((l.exp() - v).abs() <= 1e-12 * v);
            }
        }
    }
}
