use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};

use crate::error::{Error, Result};

/// Days between 0001-01-01 (CE day 1) and 1970-01-01.
const UNIX_EPOCH_CE_DAYS: i32 = 719_163;

/// A whole UTC calendar day, stored as days since 1970-01-01.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Date(i32);

impl Date {
    pub const fn from_epoch_day(day: i32) -> Self {
        Date(day)
    }

    pub fn from_ymd(year: i32, month: u32, day: u32) -> Result<Self> {
        NaiveDate::from_ymd_opt(year, month, day)
            .map(Self::from_naive)
            .ok_or_else(|| Error::DateFormat {
                input: format!("{year:04}-{month:02}-{day:02}"),
            })
    }

    /// Parses `YYYY-MM-DD`. A trailing time component (`T...` or ` ...`) is truncated to the day.
    pub fn parse(input: &str) -> Result<Self> {
        let trimmed = input.trim();
        let day_part = trimmed
            .split(|c| c == 'T' || c == ' ')
            .next()
            .unwrap_or(trimmed);
        NaiveDate::parse_from_str(day_part, "%Y-%m-%d")
            .map(Self::from_naive)
            .map_err(|_| Error::DateFormat {
                input: input.to_string(),
            })
    }

    fn from_naive(d: NaiveDate) -> Self {
        Date(d.num_days_from_ce() - UNIX_EPOCH_CE_DAYS)
    }

    pub fn epoch_day(self) -> i32 {
        self.0
    }

    pub fn to_naive(self) -> NaiveDate {
        NaiveDate::from_num_days_from_ce_opt(self.0 + UNIX_EPOCH_CE_DAYS)
            .expect("epoch day within chrono range")
    }

    pub fn add_days(self, days: i32) -> Self {
        Date(self.0 + days)
    }

    /// Signed day difference `self - other`.
    pub fn days_since(self, other: Date) -> i32 {
        self.0 - other.0
    }
}

/// Days since 1970-01-01 for an ISO `YYYY-MM-DD` string.
pub fn epoch_day(date: &str) -> Result<i32> {
    Date::parse(date).map(Date::epoch_day)
}

impl fmt::Display for Date {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_naive().format("%Y-%m-%d"))
    }
}

impl FromStr for Date {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Date::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn is_leap(y: i32) -> bool {
        (y % 4 == 0 && y % 100 != 0) || y % 400 == 0
    }

    /// Independent count: whole years since 1970, then months, then days.
    fn count_days(y: i32, m: u32, d: u32) -> i32 {
        let month_len = |y: i32, m: u32| match m {
            1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
            4 | 6 | 9 | 11 => 30,
            _ if is_leap(y) => 29,
            _ => 28,
        };
        let mut n = 0;
        for year in 1970..y {
            n += if is_leap(year) { 366 } else { 365 };
        }
        for month in 1..m {
            n += month_len(y, month);
        }
        n + d as i32 - 1
    }

    #[test]
    fn epoch_origin_and_successor() {
        assert_eq!(epoch_day("1970-01-01").unwrap(), 0);
        assert_eq!(epoch_day("1970-01-02").unwrap(), 1);
    }

    #[test]
    fn start_of_2019() {
        let leap_years = (1970..2019).filter(|&y| is_leap(y)).count();
        assert_eq!(leap_years, 12);
        assert_eq!(count_days(2019, 1, 1), 49 * 365 + 12);
        assert_eq!(epoch_day("2019-01-01").unwrap(), 17897);
    }

    #[test]
    fn bad_input_is_echoed() {
        let err = epoch_day("2019-13-01").unwrap_err();
        assert!(err.to_string().contains("2019-13-01"));
        assert!(epoch_day("yesterday").is_err());
    }

    #[test]
    fn sub_daily_timestamps_truncate() {
        assert_eq!(Date::parse("2019-01-01T23:59:00").unwrap().epoch_day(), 17897);
        assert_eq!(Date::parse("2019-01-01 06:00").unwrap().epoch_day(), 17897);
    }

    proptest! {
        #[test]
        fn matches_independent_count(y in 1970i32..2100, m in 1u32..=12, d in 1u32..=28) {
            let date = Date::from_ymd(y, m, d).unwrap();
            prop_assert_eq!(date.epoch_day(), count_days(y, m, d));
        }

        #[test]
        fn round_trips_through_text(day in -100_000i32..100_000) {
            let date = Date::from_epoch_day(day);
            prop_assert_eq!(Date::parse(&date.to_string()).unwrap(), date);
        }
    }
}
