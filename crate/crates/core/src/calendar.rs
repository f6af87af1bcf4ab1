//! Calendar-day arithmetic shared by all pipeline stages.
//!
//! Window rules, event labeling and alarm grids are all phrased in calendar
//! days. Dates map to a day number (days since the Common Era, as counted by
//! chrono) so that a fractional critical time can live on the same axis as
//! observation dates.

use chrono::{Datelike, Duration, NaiveDate};
use serde::{Deserialize, Serialize};

/// Day number of a calendar date: days since CE (0001-01-01 is day 1).
pub fn day_number(d: NaiveDate) -> i64 {
    d.num_days_from_ce() as i64
}

/// Inverse of [`day_number`]. Panics on out-of-range input.
pub fn date_from_day_number(n: i64) -> NaiveDate {
    NaiveDate::from_num_days_from_ce_opt(n as i32).expect("day number out of range")
}

/// Inclusive range of calendar days.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateRange {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateRange {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Self {
        assert!(start <= end, "range start after end");
        Self { start, end }
    }

    /// Number of calendar days in the range, both endpoints included.
    pub fn num_days(&self) -> usize {
        (day_number(self.end) - day_number(self.start) + 1) as usize
    }

    pub fn contains(&self, d: NaiveDate) -> bool {
        self.start <= d && d <= self.end
    }

    /// Iterate every calendar day of the range.
    pub fn days(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        let n = self.num_days();
        let start = self.start;
        (0..n).map(move |i| start + Duration::days(i as i64))
    }
}

/// A series with one value per calendar day, anchored at `start`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailySeries {
    pub start: NaiveDate,
    pub values: Vec<f64>,
}

impl DailySeries {
    pub fn new(start: NaiveDate, values: Vec<f64>) -> Self {
        Self { start, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn range(&self) -> DateRange {
        DateRange::new(self.start, self.end())
    }

    pub fn end(&self) -> NaiveDate {
        self.start + Duration::days(self.values.len() as i64 - 1)
    }

    pub fn date_at(&self, idx: usize) -> NaiveDate {
        self.start + Duration::days(idx as i64)
    }

    /// Index of a date inside the series, if covered.
    pub fn index_of(&self, d: NaiveDate) -> Option<usize> {
        let off = day_number(d) - day_number(self.start);
        if off < 0 || off as usize >= self.values.len() {
            None
        } else {
            Some(off as usize)
        }
    }

    pub fn value_on(&self, d: NaiveDate) -> Option<f64> {
        self.index_of(d).map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (NaiveDate, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.date_at(i), v))
    }
}
