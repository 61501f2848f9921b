//! Great Britain special-day calendar.
//!
//! Special days are New Year's Day, the day after, Good Friday, Easter
//! Monday, the early-May, spring and summer bank holiday Mondays, and the
//! Christmas period 21–31 December. Substitute holidays are not modelled:
//! 25/26 December on a weekend are still Christmas Day and Boxing Day.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_YEAR: i32 = 1900;
pub const MAX_YEAR: i32 = 2200;

fn check_year(year: i32) -> Result<()> {
    if (MIN_YEAR..=MAX_YEAR).contains(&year) {
        Ok(())
    } else {
        Err(Error::YearOutOfRange(year))
    }
}

fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid calendar date")
}

/// Which side of the Christmas/Boxing pair a proximity day lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProximitySide {
    PrecedesChristmas,
    FollowsBoxing,
}

/// B-PD: the only day between a weekend and Christmas Day or Boxing Day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bridging {
    Bridging,
    NonBridging,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpecialDayKind {
    NewYearsDay,
    DayAfterNewYear,
    GoodFriday,
    EasterMonday,
    EarlyMayBankHoliday,
    SpringBankHoliday,
    SummerBankHoliday,
    ChristmasDay,
    BoxingDay,
    ProximityDay {
        side: ProximitySide,
        bridging: Bridging,
    },
    OtherChristmasPeriod,
}

impl SpecialDayKind {
    /// Falls on the same weekday every year.
    pub fn is_fixed_weekday(self) -> bool {
        matches!(
            self,
            Self::GoodFriday
                | Self::EasterMonday
                | Self::EarlyMayBankHoliday
                | Self::SpringBankHoliday
                | Self::SummerBankHoliday
        )
    }

    pub fn is_easter(self) -> bool {
        matches!(self, Self::GoodFriday | Self::EasterMonday)
    }

    pub fn is_bank_holiday_monday(self) -> bool {
        matches!(
            self,
            Self::EarlyMayBankHoliday | Self::SpringBankHoliday | Self::SummerBankHoliday
        )
    }

    pub fn is_christmas_period(self) -> bool {
        matches!(
            self,
            Self::ChristmasDay
                | Self::BoxingDay
                | Self::ProximityDay { .. }
                | Self::OtherChristmasPeriod
        )
    }

    pub fn is_proximity(self) -> bool {
        matches!(self, Self::ProximityDay { .. })
    }
}

impl fmt::Display for SpecialDayKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NewYearsDay => f.write_str("NewYearsDay"),
            Self::DayAfterNewYear => f.write_str("DayAfterNewYear"),
            Self::GoodFriday => f.write_str("GoodFriday"),
            Self::EasterMonday => f.write_str("EasterMonday"),
            Self::EarlyMayBankHoliday => f.write_str("EarlyMayBankHoliday"),
            Self::SpringBankHoliday => f.write_str("SpringBankHoliday"),
            Self::SummerBankHoliday => f.write_str("SummerBankHoliday"),
            Self::ChristmasDay => f.write_str("ChristmasDay"),
            Self::BoxingDay => f.write_str("BoxingDay"),
            Self::ProximityDay { side, bridging } => {
                let side = match side {
                    ProximitySide::PrecedesChristmas => "PrecedesChristmas",
                    ProximitySide::FollowsBoxing => "FollowsBoxing",
                };
                let b = match bridging {
                    Bridging::Bridging => "B-PD",
                    Bridging::NonBridging => "NB-PD",
                };
                write!(f, "ProximityDay:{side}:{b}")
            }
            Self::OtherChristmasPeriod => f.write_str("OtherChristmasPeriod"),
        }
    }
}

impl FromStr for SpecialDayKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "NewYearsDay" => Self::NewYearsDay,
            "DayAfterNewYear" => Self::DayAfterNewYear,
            "GoodFriday" => Self::GoodFriday,
            "EasterMonday" => Self::EasterMonday,
            "EarlyMayBankHoliday" => Self::EarlyMayBankHoliday,
            "SpringBankHoliday" => Self::SpringBankHoliday,
            "SummerBankHoliday" => Self::SummerBankHoliday,
            "ChristmasDay" => Self::ChristmasDay,
            "BoxingDay" => Self::BoxingDay,
            "OtherChristmasPeriod" => Self::OtherChristmasPeriod,
            other => {
                let parts: Vec<&str> = other.split(':').collect();
                match parts.as_slice() {
                    ["ProximityDay", side, b] => {
                        let side = match *side {
                            "PrecedesChristmas" => ProximitySide::PrecedesChristmas,
                            "FollowsBoxing" => ProximitySide::FollowsBoxing,
                            _ => return Err(format!("unknown proximity side '{side}'")),
                        };
                        let bridging = match *b {
                            "B-PD" => Bridging::Bridging,
                            "NB-PD" => Bridging::NonBridging,
                            _ => return Err(format!("unknown bridging class '{b}'")),
                        };
                        Self::ProximityDay { side, bridging }
                    }
                    _ => return Err(format!("unknown special day kind '{other}'")),
                }
            }
        })
    }
}

/// Intraday cycle class: Tuesday to Thursday share one profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CycleClass {
    Mon,
    Twt,
    Fri,
    Sat,
    Sun,
}

impl CycleClass {
    pub const ALL: [CycleClass; 5] = [Self::Mon, Self::Twt, Self::Fri, Self::Sat, Self::Sun];

    pub fn of(weekday: Weekday) -> Self {
        match weekday {
            Weekday::Mon => Self::Mon,
            Weekday::Tue | Weekday::Wed | Weekday::Thu => Self::Twt,
            Weekday::Fri => Self::Fri,
            Weekday::Sat => Self::Sat,
            Weekday::Sun => Self::Sun,
        }
    }

    pub fn is_weekend(self) -> bool {
        matches!(self, Self::Sat | Self::Sun)
    }
}

impl fmt::Display for CycleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Mon => "Mon",
            Self::Twt => "TWT",
            Self::Fri => "Fri",
            Self::Sat => "Sat",
            Self::Sun => "Sun",
        };
        f.write_str(s)
    }
}

pub fn is_weekend(date: NaiveDate) -> bool {
    matches!(date.weekday(), Weekday::Sat | Weekday::Sun)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DayClassification {
    pub date: NaiveDate,
    pub day_of_week: Weekday,
    pub kind: Option<SpecialDayKind>,
    pub cycle_class: CycleClass,
}

impl DayClassification {
    pub fn is_special(&self) -> bool {
        self.kind.is_some()
    }
}

/// Gregorian Easter Sunday by the anonymous computus.
pub fn easter_sunday(year: i32) -> Result<NaiveDate> {
    check_year(year)?;
    let a = year % 19;
    let b = year / 100;
    let c = year % 100;
    let d = b / 4;
    let e = b % 4;
    let f = (b + 8) / 25;
    let g = (b - f + 1) / 3;
    let h = (19 * a + b - d - g + 15) % 30;
    let i = c / 4;
    let k = c % 4;
    let l = (32 + 2 * e + 2 * i - h - k) % 7;
    let m = (a + 11 * h + 22 * l) / 451;
    let month = (h + l - 7 * m + 114) / 31;
    let day = (h + l - 7 * m + 114) % 31 + 1;
    Ok(ymd(year, month as u32, day as u32))
}

fn last_weekday_of_month(year: i32, month: u32, weekday: Weekday) -> NaiveDate {
    let first_next = if month == 12 {
        ymd(year + 1, 1, 1)
    } else {
        ymd(year, month + 1, 1)
    };
    let mut d = first_next - Duration::days(1);
    while d.weekday() != weekday {
        d -= Duration::days(1);
    }
    d
}

fn first_weekday_of_month(year: i32, month: u32, weekday: Weekday) -> NaiveDate {
    let mut d = ymd(year, month, 1);
    while d.weekday() != weekday {
        d += Duration::days(1);
    }
    d
}

/// Summertime start and end: last Sundays of March and October.
pub fn clock_change_dates(year: i32) -> Result<(NaiveDate, NaiveDate)> {
    check_year(year)?;
    Ok((
        last_weekday_of_month(year, 3, Weekday::Sun),
        last_weekday_of_month(year, 10, Weekday::Sun),
    ))
}

/// Whether the date falls on or after the summertime start of its own year.
pub fn after_summer_start(date: NaiveDate) -> Result<bool> {
    let (start, _) = clock_change_dates(date.year())?;
    Ok(date >= start)
}

fn bridging_of(date: NaiveDate) -> Bridging {
    let is_xmas_or_boxing = |d: NaiveDate| d.month() == 12 && (d.day() == 25 || d.day() == 26);
    let prev = date - Duration::days(1);
    let next = date + Duration::days(1);
    let bridges = !is_weekend(date)
        && ((is_weekend(prev) && is_xmas_or_boxing(next))
            || (is_xmas_or_boxing(prev) && is_weekend(next)));
    if bridges {
        Bridging::Bridging
    } else {
        Bridging::NonBridging
    }
}

/// Computed GB classification of a date, ignoring overrides.
fn builtin_kind(date: NaiveDate) -> Result<Option<SpecialDayKind>> {
    use SpecialDayKind::*;
    let year = date.year();
    check_year(year)?;
    let (m, d) = (date.month(), date.day());
    let kind = match (m, d) {
        (1, 1) => Some(NewYearsDay),
        (1, 2) => Some(DayAfterNewYear),
        (12, 25) => Some(ChristmasDay),
        (12, 26) => Some(BoxingDay),
        (12, 31) => Some(OtherChristmasPeriod),
        (12, 21..=24) => Some(ProximityDay {
            side: ProximitySide::PrecedesChristmas,
            bridging: bridging_of(date),
        }),
        (12, 27..=30) => Some(ProximityDay {
            side: ProximitySide::FollowsBoxing,
            bridging: bridging_of(date),
        }),
        (3 | 4, _) => {
            let easter = easter_sunday(year)?;
            if date == easter - Duration::days(2) {
                Some(GoodFriday)
            } else if date == easter + Duration::days(1) {
                Some(EasterMonday)
            } else {
                None
            }
        }
        (5, _) if date == first_weekday_of_month(year, 5, Weekday::Mon) => {
            Some(EarlyMayBankHoliday)
        }
        (5, _) if date == last_weekday_of_month(year, 5, Weekday::Mon) => Some(SpringBankHoliday),
        (8, _) if date == last_weekday_of_month(year, 8, Weekday::Mon) => Some(SummerBankHoliday),
        _ => None,
    };
    Ok(kind)
}

/// Special-day calendar: computed GB days, optionally disabled, with
/// per-date overrides layered on top.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Calendar {
    builtin: bool,
    overrides: BTreeMap<NaiveDate, Option<SpecialDayKind>>,
}

impl Calendar {
    pub fn great_britain() -> Self {
        Self {
            builtin: true,
            overrides: BTreeMap::new(),
        }
    }

    /// A calendar in which every day is normal.
    pub fn all_normal() -> Self {
        Self {
            builtin: false,
            overrides: BTreeMap::new(),
        }
    }

    /// Marks `date` as `kind`, or as a normal day when `kind` is `None`.
    pub fn set_override(&mut self, date: NaiveDate, kind: Option<SpecialDayKind>) {
        self.overrides.insert(date, kind);
    }

    pub fn has_special_days(&self) -> bool {
        self.builtin || self.overrides.values().any(Option::is_some)
    }

    /// Reads an override file with rows `date,kind`. A kind of `Normal`
    /// removes the date from the special days.
    pub fn read_overrides<R: Read>(&mut self, reader: R) -> Result<()> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        for (i, rec) in rdr.records().enumerate() {
            let row = i + 1;
            let rec = rec.map_err(|e| Error::Parse {
                row,
                message: e.to_string(),
            })?;
            if rec.len() != 2 {
                return Err(Error::Parse {
                    row,
                    message: format!("expected 2 fields, found {}", rec.len()),
                });
            }
            let date = NaiveDate::parse_from_str(&rec[0], "%Y-%m-%d").map_err(|e| {
                Error::Parse {
                    row,
                    message: format!("bad date '{}': {e}", &rec[0]),
                }
            })?;
            let kind = match &rec[1] {
                "Normal" => None,
                s => Some(
                    s.parse::<SpecialDayKind>()
                        .map_err(|message| Error::Parse { row, message })?,
                ),
            };
            self.set_override(date, kind);
        }
        Ok(())
    }

    pub fn read_overrides_path(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::open(path)?;
        self.read_overrides(std::io::BufReader::new(f))
    }

    pub fn kind(&self, date: NaiveDate) -> Result<Option<SpecialDayKind>> {
        check_year(date.year())?;
        if let Some(k) = self.overrides.get(&date) {
            return Ok(*k);
        }
        if self.builtin {
            builtin_kind(date)
        } else {
            Ok(None)
        }
    }

    pub fn classify(&self, date: NaiveDate) -> Result<DayClassification> {
        Ok(DayClassification {
            date,
            day_of_week: date.weekday(),
            kind: self.kind(date)?,
            cycle_class: CycleClass::of(date.weekday()),
        })
    }

    pub fn is_special(&self, date: NaiveDate) -> Result<bool> {
        Ok(self.kind(date)?.is_some())
    }

    /// All special days of a year in date order.
    pub fn special_days(&self, year: i32) -> Result<Vec<(NaiveDate, SpecialDayKind)>> {
        check_year(year)?;
        let mut days: BTreeMap<NaiveDate, SpecialDayKind> = BTreeMap::new();
        if self.builtin {
            let easter = easter_sunday(year)?;
            let mut candidates = vec![
                ymd(year, 1, 1),
                ymd(year, 1, 2),
                easter - Duration::days(2),
                easter + Duration::days(1),
                first_weekday_of_month(year, 5, Weekday::Mon),
                last_weekday_of_month(year, 5, Weekday::Mon),
                last_weekday_of_month(year, 8, Weekday::Mon),
            ];
            candidates.extend((21..=31).map(|d| ymd(year, 12, d)));
            for d in candidates {
                if let Some(k) = builtin_kind(d)? {
                    days.insert(d, k);
                }
            }
        }
        for (d, k) in self
            .overrides
            .range(ymd(year, 1, 1)..=ymd(year, 12, 31))
        {
            match k {
                Some(k) => {
                    days.insert(*d, *k);
                }
                None => {
                    days.remove(d);
                }
            }
        }
        Ok(days.into_iter().collect())
    }

    /// Most recent occurrence of `kind` in a year before `before_year`.
    pub fn same_special_day(&self, kind: SpecialDayKind, before_year: i32) -> Result<NaiveDate> {
        check_year(before_year)?;
        for year in (MIN_YEAR..before_year).rev() {
            if let Some((d, _)) = self
                .special_days(year)?
                .into_iter()
                .rev()
                .find(|(_, k)| *k == kind)
            {
                return Ok(d);
            }
        }
        Err(Error::InsufficientHistory(format!(
            "no {kind} before {before_year}"
        )))
    }
}
