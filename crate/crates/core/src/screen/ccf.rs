use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CcfConfig {
    pub max_lag: usize,
    pub alpha: f64,
}

impl Default for CcfConfig {
    fn default() -> Self {
        Self { max_lag: 12, alpha: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CcfResult {
    /// Lags `−max_lag..=max_lag`; positive lags pair `x_{t−k}` with `y_t`.
    pub lags: Vec<i64>,
    pub rho: Vec<f64>,
    /// `1.96/√n`, the pointwise 95% white-noise band.
    pub bound: f64,
    pub significant: Vec<bool>,
    /// Largest `|ρ(k)|` over `k = 0..=max_lag`.
    pub max_abs_rho: f64,
    pub max_lag_at: i64,
    /// Band for the decision, Bonferroni-adjusted over the leading lags.
    pub decision_bound: f64,
    pub decision: bool,
}

/// Correlation of `x_{t−k}` with `y_t` on the overlap window.
pub fn lagged_correlation(x: &[f64], y: &[f64], k: i64) -> Option<f64> {
    let n = x.len() as i64;
    let (lo, hi) = (k.max(0), n + k.min(0));
    if hi - lo < 3 {
        return None;
    }
    let xs: Vec<f64> = (lo..hi).map(|t| x[(t - k) as usize]).collect();
    let ys: Vec<f64> = (lo..hi).map(|t| y[t as usize]).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in xs.iter().zip(&ys) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

pub fn cross_correlation(x: &[f64], y: &[f64], cfg: &CcfConfig) -> Result<CcfResult> {
    let n = x.len();
    if y.len() != n {
        return Err(Error::Alignment(format!("series lengths differ: {n} vs {}", y.len())));
    }
    if n <= cfg.max_lag + 2 {
        return Err(Error::InsufficientData(format!("{n} points for max lag {}", cfg.max_lag)));
    }
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", cfg.alpha)));
    }
    let l = cfg.max_lag as i64;
    let lags: Vec<i64> = (-l..=l).collect();
    let rho = lags
        .iter()
        .map(|&k| lagged_correlation(x, y, k).ok_or_else(|| Error::Domain(format!("zero variance at lag {k}"))))
        .collect::<Result<Vec<f64>>>()?;
    let bound = 1.96 / (n as f64).sqrt();
    let significant = rho.iter().map(|r| r.abs() > bound).collect();
    let z = Normal::standard().inverse_cdf(1.0 - cfg.alpha / (2.0 * (cfg.max_lag + 1) as f64));
    let decision_bound = z / (n as f64).sqrt();
    let (max_lag_at, max_abs_rho) = lags
        .iter()
        .zip(&rho)
        .filter(|(k, _)| **k >= 0)
        .map(|(k, r)| (*k, r.abs()))
        .fold((0, -1.0), |best, c| if c.1 > best.1 { c } else { best });
    Ok(CcfResult {
        lags,
        rho,
        bound,
        significant,
        max_abs_rho,
        max_lag_at,
        decision_bound,
        decision: max_abs_rho > decision_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn autocorrelation_at_zero_is_one() {
        let x: Vec<f64> = (0..30).map(|i| ((i * 7) % 11) as f64).collect();
        let r = cross_correlation(&x, &x, &CcfConfig { max_lag: 5, alpha: 0.05 }).unwrap();
        assert_eq!(r.rho[5], 1.0);
    }

    #[test]
    fn shifted_copy_peaks_at_shift() {
        let x: Vec<f64> = (0..80).map(|i| ((i * 37 + 11) % 23) as f64 - 11.0).collect();
        let y: Vec<f64> = (0..80).map(|t| if t >= 3 { x[t - 3] } else { 0.0 }).collect();
        let r = cross_correlation(&x, &y, &CcfConfig::default()).unwrap();
        assert_eq!(r.max_lag_at, 3);
        assert!(r.decision);
    }

    #[test]
    fn five_point_hand_computation() {
        let x = [1.0, 2.0, 4.0, 3.0, 5.0];
        let y = [2.0, 1.0, 3.0, 6.0, 4.0];
        // lag 1 overlap pairs (x0..x3, y1..y4)
        let xs = [1.0, 2.0, 4.0, 3.0];
        let ys = [1.0, 3.0, 6.0, 4.0];
        let (mx, my) = (2.5, 3.5);
        let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = xs.iter().map(|a| (a - mx) * (a - mx)).sum();
        let syy: f64 = ys.iter().map(|b| (b - my) * (b - my)).sum();
        let expected = sxy / (sxx * syy).sqrt();
        assert!((lagged_correlation(&x, &y, 1).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn constant_series_rejected() {
        let x = vec![1.0; 20];
        let y: Vec<f64> = (0..20).map(|i| i as f64).collect();
        assert!(cross_correlation(&x, &y, &CcfConfig { max_lag: 2, alpha: 0.05 }).is_err());
    }
}
