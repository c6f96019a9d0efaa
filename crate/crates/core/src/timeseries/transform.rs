use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::TimeSeries;
use crate::error::{Error, Result};

/// Stationarity transforms applied to raw predictors before alignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    Identity,
    Log,
    /// `ln x[t − lag_a] − ln x[t − lag_b]`, with `lag_a < lag_b`.
    LogDiff { lag_a: usize, lag_b: usize },
}

impl Transform {
    pub fn log_diff(lag_a: usize, lag_b: usize) -> Result<Self> {
        if lag_a >= lag_b {
            return Err(Error::Config(format!(
                "log-diff lags must satisfy lag_a < lag_b, got ({lag_a}, {lag_b})"
            )));
        }
        Ok(Transform::LogDiff { lag_a, lag_b })
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transform::Identity => f.write_str("identity"),
            Transform::Log => f.write_str("log"),
            Transform::LogDiff { lag_a, lag_b } => write!(f, "logdiff({lag_a},{lag_b})"),
        }
    }
}

impl FromStr for Transform {
    type Err = Error;

    /// Parses `identity`, `log` or `logdiff(a,b)`.
    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
        match t.as_str() {
            "identity" | "none" | "x" => Ok(Transform::Identity),
            "log" | "ln" => Ok(Transform::Log),
            _ => {
                let inner = t
                    .strip_prefix("logdiff(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| Error::Config(format!("unknown transform {s:?}")))?;
                let (a, b) = inner
                    .split_once(',')
                    .ok_or_else(|| Error::Config(format!("malformed transform {s:?}")))?;
                let parse = |v: &str| {
                    v.parse::<usize>()
                        .map_err(|_| Error::Config(format!("malformed lag in transform {s:?}")))
                };
                Transform::log_diff(parse(a)?, parse(b)?)
            }
        }
    }
}

impl Serialize for Transform {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Transform {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

fn checked_ln(series: &TimeSeries, index: usize, v: f64) -> Result<f64> {
    if v <= 0.0 {
        return Err(Error::Domain(format!(
            "log transform of nonpositive value {v} in {:?} at {}",
            series.name(),
            series.date(index)
        )));
    }
    Ok(v.ln())
}

/// Applies `t` to `s`. Log-differences drop `lag_b` leading entries; missing
/// inputs propagate as missing outputs.
pub fn apply_transform(s: &TimeSeries, t: Transform) -> Result<TimeSeries> {
    match t {
        Transform::Identity => Ok(s.clone()),
        Transform::Log => {
            let values = s
                .values()
                .iter()
                .enumerate()
                .map(|(i, v)| v.map(|x| checked_ln(s, i, x)).transpose())
                .collect::<Result<Vec<_>>>()?;
            TimeSeries::new(s.name(), s.start(), values)
        }
        Transform::LogDiff { lag_a, lag_b } => {
            if lag_a >= lag_b {
                return Err(Error::Config(format!("log-diff lags ({lag_a}, {lag_b}) not increasing")));
            }
            if s.len() <= lag_b {
                return Err(Error::InsufficientData(format!(
                    "series {:?} has {} values, log-diff needs more than {lag_b}",
                    s.name(),
                    s.len()
                )));
            }
            let v = s.values();
            let values = (lag_b..s.len())
                .map(|t| match (v[t - lag_a], v[t - lag_b]) {
                    (Some(a), Some(b)) => Ok(Some(checked_ln(s, t - lag_a, a)? - checked_ln(s, t - lag_b, b)?)),
                    _ => Ok(None),
                })
                .collect::<Result<Vec<_>>>()?;
            TimeSeries::new(s.name(), s.date(lag_b), values)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::YearMonth;
    use proptest::prelude::*;

    fn start() -> YearMonth {
        YearMonth::new(1987, 4).unwrap()
    }

    #[test]
    fn identity_is_noop() {
        let s = TimeSeries::new("x", start(), vec![Some(-1.0), None, Some(2.0)]).unwrap();
        assert_eq!(apply_transform(&s, Transform::Identity).unwrap(), s);
    }

    #[test]
    fn log_diff_closed_form() {
        let e = std::f64::consts::E;
        let s = TimeSeries::from_values("x", start(), &[e, e, e, e * e, e * e]).unwrap();
        let out = apply_transform(&s, Transform::log_diff(1, 4).unwrap()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out.start(), s.end());
        assert!((out.observed()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn log_diff_length_arithmetic() {
        let vals: Vec<f64> = (0..435).map(|i| 1.0 + i as f64).collect();
        let s = TimeSeries::from_values("x", start(), &vals).unwrap();
        let out = apply_transform(&s, Transform::log_diff(1, 4).unwrap()).unwrap();
        let mut expected = 0;
        for t in 0..vals.len() {
            if t >= 4 {
                expected += 1;
            }
        }
        assert_eq!(out.len(), expected);
        assert_eq!(out.len(), 431);
    }

    #[test]
    fn nonpositive_under_log_is_domain_error() {
        let s = TimeSeries::from_values("x", start(), &[1.0, 0.0, 2.0]).unwrap();
        assert!(matches!(apply_transform(&s, Transform::Log), Err(Error::Domain(_))));
    }

    #[test]
    fn parse_and_display() {
        assert_eq!("logdiff(1, 4)".parse::<Transform>().unwrap(), Transform::LogDiff { lag_a: 1, lag_b: 4 });
        assert_eq!("ln".parse::<Transform>().unwrap(), Transform::Log);
        assert!("logdiff(4,1)".parse::<Transform>().is_err());
        assert_eq!(Transform::LogDiff { lag_a: 1, lag_b: 4 }.to_string(), "logdiff(1,4)");
    }

    proptest! {
        #[test]
        fn log_diff_matches_naive_loop(vals in prop::collection::vec(0.01f64..1e4, 6..60), a in 0usize..3, gap in 1usize..3) {
            let b = a + gap;
            let s = TimeSeries::from_values("x", start(), &vals).unwrap();
            let out = apply_transform(&s, Transform::log_diff(a, b).unwrap()).unwrap();
            let mut naive = Vec::new();
            for t in b..vals.len() {
                naive.push(vals[t - a].ln() - vals[t - b].ln());
            }
            prop_assert_eq!(out.observed(), naive);
        }
    }
}
