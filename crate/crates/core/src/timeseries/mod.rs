//! Monthly time series: ingestion, transforms, alignment and descriptive
//! diagnostics.

mod align;
mod csv_io;
pub(crate) mod diagnostics;
mod transform;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use align::{align, AlignWarning, Alignment, DesignMatrix, ModelInputs};
pub use csv_io::{load_csv, read_csv, write_series_csv};
pub use diagnostics::{diagnostics, DiagnosticsReport};
pub use transform::{apply_transform, Transform};

/// A calendar month. Ordered by `(year, month)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    year: i32,
    month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::Schema(format!("month {month} out of range")));
        }
        Ok(Self { year, month })
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn month(self) -> u32 {
        self.month
    }

    /// Months since year 0, January.
    pub fn ordinal(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    pub fn from_ordinal(ordinal: i64) -> Self {
        Self {
            year: ordinal.div_euclid(12) as i32,
            month: ordinal.rem_euclid(12) as u32 + 1,
        }
    }

    pub fn add_months(self, months: i64) -> Self {
        Self::from_ordinal(self.ordinal() + months)
    }

    /// Signed number of months from `self` to `other`.
    pub fn months_until(self, other: YearMonth) -> i64 {
        other.ordinal() - self.ordinal()
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = Error;

    /// Accepts `YYYY-MM` or `YYYY-MM-DD`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Schema(format!("unparseable date {s:?}; expected YYYY-MM or YYYY-MM-DD"));
        match s.len() {
            7 => {
                let (y, m) = s.split_once('-').ok_or_else(bad)?;
                if y.len() != 4 || m.len() != 2 {
                    return Err(bad());
                }
                let year = y.parse().map_err(|_| bad())?;
                let month = m.parse().map_err(|_| bad())?;
                YearMonth::new(year, month).map_err(|_| bad())
            }
            10 => {
                use chrono::Datelike;
                let d = chrono::NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|_| bad())?;
                YearMonth::new(d.year(), d.month())
            }
            _ => Err(bad()),
        }
    }
}

impl Serialize for YearMonth {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for YearMonth {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A named monthly series. Missing entries are explicit `None`; stored
/// values are always finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    name: String,
    start: YearMonth,
    values: Vec<Option<f64>>,
}

impl TimeSeries {
    pub fn new(name: impl Into<String>, start: YearMonth, values: Vec<Option<f64>>) -> Result<Self> {
        let name = name.into();
        if values.is_empty() {
            return Err(Error::Schema(format!("series {name:?} is empty")));
        }
        if let Some(i) = values.iter().position(|v| v.is_some_and(|x| !x.is_finite())) {
            return Err(Error::NonFinite {
                index: i,
                message: format!("series {name:?} stores a non-finite value"),
            });
        }
        Ok(Self { name, start, values })
    }

    /// Builds a fully observed series.
    pub fn from_values(name: impl Into<String>, start: YearMonth, values: &[f64]) -> Result<Self> {
        Self::new(name, start, values.iter().copied().map(Some).collect())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn start(&self) -> YearMonth {
        self.start
    }

    pub fn end(&self) -> YearMonth {
        self.start.add_months(self.values.len() as i64 - 1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn date(&self, index: usize) -> YearMonth {
        self.start.add_months(index as i64)
    }

    pub fn get(&self, date: YearMonth) -> Option<f64> {
        let idx = self.start.months_until(date);
        if idx < 0 {
            return None;
        }
        self.values.get(idx as usize).copied().flatten()
    }

    /// Observed values in time order, skipping missing entries.
    pub fn observed(&self) -> Vec<f64> {
        self.values.iter().flatten().copied().collect()
    }

    pub fn has_missing(&self) -> bool {
        self.values.iter().any(Option::is_none)
    }

    /// Places `values` at ascending `dates`; skipped months become missing.
    pub fn from_dated(name: impl Into<String>, dates: &[YearMonth], values: &[f64]) -> Result<Self> {
        let name = name.into();
        if dates.len() != values.len() {
            return Err(Error::Dimension(format!("{} dates for {} values in {name:?}", dates.len(), values.len())));
        }
        let start = *dates.first().ok_or_else(|| Error::Schema(format!("series {name:?} is empty")))?;
        if dates.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Schema(format!("dates for {name:?} are not strictly ascending")));
        }
        let mut v = vec![None; start.months_until(*dates.last().unwrap()) as usize + 1];
        for (d, x) in dates.iter().zip(values) {
            v[start.months_until(*d) as usize] = Some(*x);
        }
        Self::new(name, start, v)
    }

    /// Restricts the series to `[from, to]` (inclusive, either bound optional).
    pub fn slice(&self, from: Option<YearMonth>, to: Option<YearMonth>) -> Result<Self> {
        let from = from.unwrap_or(self.start).max(self.start);
        let to = to.unwrap_or(self.end()).min(self.end());
        if to < from {
            return Err(Error::Alignment(format!(
                "series {:?} has no observations between {from} and {to}",
                self.name
            )));
        }
        let a = self.start.months_until(from) as usize;
        let b = self.start.months_until(to) as usize;
        Self::new(self.name.clone(), from, self.values[a..=b].to_vec())
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn year_month_parsing_and_arithmetic() {
        let a: YearMonth = "1987-04".parse().unwrap();
        let b: YearMonth = "2021-06-01".parse().unwrap();
        assert_eq!(a.months_until(b), 410);
        assert_eq!(a.add_months(410), b);
        assert_eq!(b.to_string(), "2021-06");
        assert!("2021-13".parse::<YearMonth>().is_err());
        assert!("June 2021".parse::<YearMonth>().is_err());
        assert_eq!(YearMonth::from_ordinal(a.ordinal()), a);
    }

    #[test]
    fn series_rejects_nan_and_empty() {
        let s = YearMonth::new(2000, 1).unwrap();
        assert!(TimeSeries::new("x", s, vec![]).is_err());
        assert!(TimeSeries::new("x", s, vec![Some(f64::NAN)]).is_err());
        let ts = TimeSeries::new("x", s, vec![Some(1.0), None, Some(3.0)]).unwrap();
        assert_eq!(ts.end(), YearMonth::new(2000, 3).unwrap());
        assert_eq!(ts.observed(), vec![1.0, 3.0]);
        assert_eq!(ts.get(YearMonth::new(2000, 3).unwrap()), Some(3.0));
        assert_eq!(ts.get(YearMonth::new(1999, 12).unwrap()), None);
    }

    #[test]
    fn slice_inclusive() {
        let s = YearMonth::new(2000, 1).unwrap();
        let ts = TimeSeries::from_values("x", s, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let sl = ts.slice(Some(s.add_months(1)), Some(s.add_months(2))).unwrap();
        assert_eq!(sl.observed(), vec![2.0, 3.0]);
        assert_eq!(sl.start(), s.add_months(1));
    }
}
