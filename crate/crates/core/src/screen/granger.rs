use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::error::{Error, Result};
use crate::linalg::ols;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GrangerConfig {
    /// Largest lag considered by AIC.
    pub max_lag: usize,
    /// Fixed lag order; skips AIC selection.
    pub lag: Option<usize>,
    pub alpha: f64,
}

impl Default for GrangerConfig {
    fn default() -> Self {
        Self {
            max_lag: 12,
            lag: None,
            alpha: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrangerResult {
    pub lag: usize,
    pub f_statistic: f64,
    pub p_value: f64,
    pub df1: usize,
    pub df2: usize,
    pub rss_restricted: f64,
    pub rss_unrestricted: f64,
}

/// Lagged design on rows `t = start..n`: intercept, `p` lags of `y`, and
/// optionally `p` lags of `x`.
fn lag_design(x: &[f64], y: &[f64], p: usize, start: usize, with_x: bool) -> (DMatrix<f64>, DVector<f64>) {
    let n = y.len();
    let cols = 1 + p + if with_x { p } else { 0 };
    let rows = n - start;
    let design = DMatrix::from_fn(rows, cols, |r, c| {
        let t = start + r;
        match c {
            0 => 1.0,
            c if c <= p => y[t - c],
            c => x[t - (c - p)],
        }
    });
    (design, DVector::from_fn(rows, |r, _| y[start + r]))
}

/// F test that lags `1..=p` of `x` add nothing to an AR(`p`) for `y`.
pub fn granger_test(x: &[f64], y: &[f64], p: usize) -> Result<GrangerResult> {
    if x.len() != y.len() {
        return Err(Error::Alignment(format!("series lengths differ: {} vs {}", x.len(), y.len())));
    }
    if p == 0 {
        return Err(Error::Config("Granger lag must be at least 1".into()));
    }
    let n_eff = y.len().saturating_sub(p);
    if n_eff <= 2 * p + 1 {
        return Err(Error::InsufficientData(format!("{n_eff} usable rows for lag {p}")));
    }
    let (xr, yy) = lag_design(x, y, p, p, false);
    let (xu, _) = lag_design(x, y, p, p, true);
    let rss_r = ols(&xr, &yy)?.rss;
    let rss_u = ols(&xu, &yy)?.rss;
    let df2 = n_eff - 2 * p - 1;
    let f = ((rss_r - rss_u) / p as f64) / (rss_u / df2 as f64);
    let f = f.max(0.0);
    let dist = FisherSnedecor::new(p as f64, df2 as f64).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(GrangerResult {
        lag: p,
        f_statistic: f,
        p_value: dist.sf(f),
        df1: p,
        df2,
        rss_restricted: rss_r,
        rss_unrestricted: rss_u,
    })
}

/// Lag minimising the AIC of the unrestricted regression, compared on the
/// common sample that drops the first `max_lag` points.
pub fn select_granger_lag(x: &[f64], y: &[f64], max_lag: usize) -> Result<usize> {
    if max_lag == 0 {
        return Err(Error::Config("Granger max lag must be at least 1".into()));
    }
    let n = y.len();
    let max_lag = max_lag.min((n.saturating_sub(2)) / 3);
    if max_lag == 0 {
        return Err(Error::InsufficientData(format!("{n} points are too few for lag selection")));
    }
    let mut best = (f64::INFINITY, 1);
    for p in 1..=max_lag {
        let (xu, yy) = lag_design(x, y, p, max_lag, true);
        let rss = ols(&xu, &yy)?.rss;
        let m = yy.len() as f64;
        let aic = m * (rss / m).ln() + 2.0 * xu.ncols() as f64;
        if aic < best.0 {
            best = (aic, p);
        }
    }
    Ok(best.1)
}

/// Runs [`granger_test`] at the configured or AIC-selected lag.
pub fn granger(x: &[f64], y: &[f64], cfg: &GrangerConfig) -> Result<GrangerResult> {
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", cfg.alpha)));
    }
    let p = match cfg.lag {
        Some(p) => p,
        None => select_granger_lag(x, y, cfg.max_lag)?,
    };
    granger_test(x, y, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    #[test]
    fn f_from_hand_rss() {
        let x = [0.3, -1.2, 0.8, 1.5, -0.4, 0.9, -0.7, 0.2, 1.1, -0.5];
        let y = [1.0, 0.2, -0.9, 0.7, 1.8, -0.1, 1.0, -0.4, 0.5, 1.3];
        let r = granger_test(&x, &y, 1).unwrap();
        // restricted: y_t on (1, y_{t-1}); unrestricted adds x_{t-1}; n_eff = 9
        let (xr, yy) = lag_design(&x, &y, 1, 1, false);
        let (xu, _) = lag_design(&x, &y, 1, 1, true);
        let rr = ols(&xr, &yy).unwrap().rss;
        let ru = ols(&xu, &yy).unwrap().rss;
        assert_eq!(r.df2, 6);
        assert!((r.f_statistic - (rr - ru) / (ru / 6.0)).abs() < 1e-10);
        assert!(xu[(0, 2)] == 0.3 && xu[(0, 1)] == 1.0 && yy[0] == 0.2);
    }

    #[test]
    fn strong_coupling_detected() {
        let x = noise(300, 1);
        let e = noise(300, 2);
        let y: Vec<f64> = (0..300).map(|t| if t > 0 { 0.8 * x[t - 1] + e[t] } else { e[t] }).collect();
        let r = granger_test(&x, &y, 1).unwrap();
        assert!(r.p_value < 0.001);
    }

    #[test]
    fn f_invariant_to_affine_rescaling() {
        let x = noise(100, 3);
        let y = noise(100, 4);
        let a = granger_test(&x, &y, 3).unwrap();
        let xs: Vec<f64> = x.iter().map(|v| 5.0 * v - 2.0).collect();
        let ys: Vec<f64> = y.iter().map(|v| -0.3 * v + 7.0).collect();
        let b = granger_test(&xs, &ys, 3).unwrap();
        assert!((a.f_statistic - b.f_statistic).abs() < 1e-10);
    }

    #[test]
    fn aic_finds_true_lag_order() {
        let x = noise(400, 5);
        let e = noise(400, 6);
        let y: Vec<f64> = (0..400).map(|t| if t >= 3 { 0.9 * x[t - 3] + 0.3 * e[t] } else { e[t] }).collect();
        assert_eq!(select_granger_lag(&x, &y, 6).unwrap(), 3);
    }

    #[test]
    fn collinear_lags_are_a_conditioning_error() {
        let y = noise(50, 7);
        let x = vec![1.0; 50];
        assert!(matches!(granger_test(&x, &y, 2), Err(Error::Conditioning { .. })));
        assert!(granger_test(&y[..5], &y[..5], 2).is_err());
    }
}
