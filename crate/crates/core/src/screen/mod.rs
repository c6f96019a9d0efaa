//! Pairwise screening of candidate predictors against a target.
//!
//! Four tests run per predictor: transfer entropy with circular-shift
//! surrogates, a Granger F test, lagged cross-correlation and wavelet
//! coherence against red-noise surrogates. Each yields a Y/N decision and a
//! [`RetentionRule`] combines them.

mod ccf;
mod granger;
mod te;
mod wavelet;

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timeseries::DesignMatrix;

pub use ccf::{cross_correlation, lagged_correlation, CcfConfig, CcfResult};
pub use granger::{granger, granger_test, select_granger_lag, GrangerConfig, GrangerResult};
pub use te::{net_information_flow, quantile_bins, te_test, transfer_entropy, TeConfig, TeResult, MIN_TE_LENGTH};
pub use wavelet::{coherence, wavelet_coherence, CoherenceField, WaveletConfig, WaveletResult, MIN_WAVELET_LENGTH};

/// How per-method decisions combine into retention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetentionRule {
    /// Retained when any method says Y.
    #[default]
    Any,
    /// Retained when more than half of the methods say Y.
    Majority,
    /// Retained only when every method says Y.
    All,
}

impl RetentionRule {
    pub fn retains(self, decisions: &[bool]) -> bool {
        let yes = decisions.iter().filter(|d| **d).count();
        match self {
            RetentionRule::Any => yes > 0,
            RetentionRule::Majority => 2 * yes > decisions.len(),
            RetentionRule::All => yes == decisions.len(),
        }
    }
}

impl std::str::FromStr for RetentionRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "any" => Ok(RetentionRule::Any),
            "majority" => Ok(RetentionRule::Majority),
            "all" => Ok(RetentionRule::All),
            other => Err(Error::Config(format!("unknown retention rule {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ScreenConfig {
    pub te: TeConfig,
    pub granger: GrangerConfig,
    pub ccf: CcfConfig,
    pub wavelet: WaveletConfig,
    pub rule: RetentionRule,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveletSummary {
    pub significant_area: f64,
    pub decision: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodError {
    pub method: &'static str,
    pub message: String,
}

/// Screening outcome for one predictor. A method that failed has no result
/// and counts as N.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScreenRow {
    pub variable: String,
    pub te: Option<TeResult>,
    pub granger: Option<GrangerResult>,
    pub ccf: Option<CcfResult>,
    pub wavelet: Option<WaveletSummary>,
    pub errors: Vec<MethodError>,
    pub retained: bool,
}

impl ScreenRow {
    /// Decisions in the order TE, GC, CC, W; `None` where the method failed.
    pub fn decisions(&self, granger_alpha: f64) -> [Option<bool>; 4] {
        [
            self.te.as_ref().map(|r| r.significant),
            self.granger.as_ref().map(|r| r.p_value < granger_alpha),
            self.ccf.as_ref().map(|r| r.decision),
            self.wavelet.as_ref().map(|r| r.decision),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CausalReport {
    pub target: String,
    pub config: ScreenConfig,
    pub rows: Vec<ScreenRow>,
}

impl CausalReport {
    pub fn retained(&self) -> Vec<String> {
        self.rows.iter().filter(|r| r.retained).map(|r| r.variable.clone()).collect()
    }

    /// `variable,TE,GC,CC,W,retained` with Y/N cells (NA where a method failed).
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let io = |e: csv::Error| Error::Io {
            path: "<screen report>".into(),
            source: std::io::Error::other(e),
        };
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["variable", "TE", "GC", "CC", "W", "retained"]).map_err(io)?;
        let yn = |d: Option<bool>| match d {
            Some(true) => "Y",
            Some(false) => "N",
            None => "NA",
        };
        for r in &self.rows {
            let d = r.decisions(self.config.granger.alpha);
            w.write_record([r.variable.as_str(), yn(d[0]), yn(d[1]), yn(d[2]), yn(d[3]), yn(Some(r.retained))])
                .map_err(io)?;
        }
        w.flush().map_err(|source| Error::Io {
            path: "<screen report>".into(),
            source,
        })
    }
}

fn record<T>(errors: &mut Vec<MethodError>, method: &'static str, r: Result<T>) -> Option<T> {
    r.map_err(|e| {
        errors.push(MethodError {
            method,
            message: e.to_string(),
        })
    })
    .ok()
}

/// Runs the four tests of `x` against `target`. `stream` selects an
/// independent random stream so predictors can run in any order.
pub fn screen_pair(name: &str, x: &[f64], target: &[f64], cfg: &ScreenConfig, stream: u64) -> ScreenRow {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    let mut errors = Vec::new();
    let te = record(&mut errors, "transfer_entropy", te_test(x, target, &cfg.te, &mut rng));
    let gc = record(&mut errors, "granger", granger(x, target, &cfg.granger));
    let cc = record(&mut errors, "cross_correlation", cross_correlation(x, target, &cfg.ccf));
    let wv = record(&mut errors, "wavelet", wavelet_coherence(x, target, &cfg.wavelet, &mut rng)).map(|r| WaveletSummary {
        significant_area: r.significant_area,
        decision: r.decision,
    });
    let mut row = ScreenRow {
        variable: name.to_string(),
        te,
        granger: gc,
        ccf: cc,
        wavelet: wv,
        errors,
        retained: false,
    };
    let d: Vec<bool> = row.decisions(cfg.granger.alpha).iter().map(|d| d.unwrap_or(false)).collect();
    row.retained = cfg.rule.retains(&d);
    row
}

/// Screens every predictor column of `design` against its target. Failures
/// are recorded per predictor and never abort the run.
pub fn screen_all(design: &DesignMatrix, cfg: &ScreenConfig) -> CausalReport {
    let target = design.target();
    let rows = design
        .column_names()
        .par_iter()
        .enumerate()
        .map(|(j, name)| screen_pair(name, &design.column(j), target, cfg, j as u64))
        .collect();
    CausalReport {
        target: design.target_name().to_string(),
        config: cfg.clone(),
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rules() {
        let d = [true, false, false, true];
        assert!(RetentionRule::Any.retains(&d));
        assert!(!RetentionRule::Majority.retains(&d));
        assert!(RetentionRule::Majority.retains(&[true, true, true, false]));
        assert!(!RetentionRule::All.retains(&d));
        assert!(!RetentionRule::Any.retains(&[false; 4]));
        assert_eq!("majority".parse::<RetentionRule>().unwrap(), RetentionRule::Majority);
    }

    #[test]
    fn failed_methods_are_reported_not_fatal() {
        let x: Vec<f64> = (0..30).map(|i| ((i * 37 + 5) % 23) as f64).collect();
        let y: Vec<f64> = (0..30).map(|i| ((i * 11 + 3) % 17) as f64).collect();
        let row = screen_pair("short", &x, &y, &ScreenConfig::default(), 0);
        assert!(row.te.is_none() && row.wavelet.is_none());
        assert_eq!(row.errors.len(), 2, "{:?}", row.errors);
        assert!(row.granger.is_some() && row.ccf.is_some());
    }
}
