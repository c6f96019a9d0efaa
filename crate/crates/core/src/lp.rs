//! Local-projection impulse responses.
//!
//! For each horizon `h` the response `y_{t+h}` is regressed on the shock
//! `s_t`, `p` lags of both series, lags of any extra controls, an optional
//! linear trend and an intercept. The shock coefficient, scaled by the
//! shock's standard deviation, is the response to a one-SD shock. Standard
//! errors are Newey–West with truncation `L = h`.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{checked_cholesky, ols, sample_variance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    #[default]
    None,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LpConfig {
    /// Largest horizon `H`; responses are computed for `0..=H`.
    pub horizons: usize,
    pub max_lags: usize,
    /// Fixed lag order (may be 0); `None` selects by BIC.
    pub lags: Option<usize>,
    pub trend: Trend,
    pub ci_multiplier: f64,
}

impl Default for LpConfig {
    fn default() -> Self {
        Self {
            horizons: 24,
            max_lags: 12,
            lags: None,
            trend: Trend::None,
            ci_multiplier: 1.96,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IrfPoint {
    pub h: usize,
    pub point: f64,
    pub se: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IrfResult {
    pub shock: String,
    pub response: String,
    pub controls: Vec<String>,
    pub lags: usize,
    pub shock_sd: f64,
    pub n_obs: usize,
    pub points: Vec<IrfPoint>,
}

impl IrfResult {
    /// `h,point,se,lower,upper`
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let io = |e: csv::Error| Error::Io {
            path: "<irf>".into(),
            source: std::io::Error::other(e),
        };
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["h", "point", "se", "lower", "upper"]).map_err(io)?;
        for p in &self.points {
            w.write_record([p.h.to_string(), p.point.to_string(), p.se.to_string(), p.lower.to_string(), p.upper.to_string()])
                .map_err(io)?;
        }
        w.flush().map_err(|source| Error::Io {
            path: "<irf>".into(),
            source,
        })
    }
}

/// Regressors at time `t`: intercept, shock, `p` lags of response, shock and
/// controls, then the trend. Shock lags are left out when the shock is the
/// response itself.
fn regressors(response: &[f64], shock: &[f64], controls: &[&[f64]], p: usize, trend: Trend, t: usize) -> Vec<f64> {
    let own = response == shock;
    let mut row = vec![1.0, shock[t]];
    for l in 1..=p {
        row.push(response[t - l]);
        if !own {
            row.push(shock[t - l]);
        }
        row.extend(controls.iter().map(|c| c[t - l]));
    }
    if trend == Trend::Linear {
        row.push(t as f64);
    }
    row
}

fn design(
    response: &[f64],
    shock: &[f64],
    controls: &[&[f64]],
    p: usize,
    trend: Trend,
    rows: std::ops::Range<usize>,
    h: usize,
) -> (DMatrix<f64>, DVector<f64>) {
    let data: Vec<Vec<f64>> = rows.clone().map(|t| regressors(response, shock, controls, p, trend, t)).collect();
    let k = data.first().map_or(0, Vec::len);
    let x = DMatrix::from_fn(data.len(), k, |i, j| data[i][j]);
    let y = DVector::from_iterator(data.len(), rows.map(|t| response[t + h]));
    (x, y)
}

fn n_regressors(response: &[f64], shock: &[f64], n_controls: usize, p: usize, trend: Trend) -> usize {
    let per_lag = 1 + usize::from(response != shock) + n_controls;
    2 + p * per_lag + usize::from(trend == Trend::Linear)
}

fn check_inputs(response: &[f64], shock: &[f64], controls: &[&[f64]]) -> Result<()> {
    let n = response.len();
    if shock.len() != n || controls.iter().any(|c| c.len() != n) {
        return Err(Error::Alignment("response, shock and controls must have equal lengths".into()));
    }
    if response.iter().chain(shock).chain(controls.iter().flat_map(|c| c.iter())).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            index: 0,
            message: "local-projection input".into(),
        });
    }
    Ok(())
}

/// Lag order in `1..=max_lags` minimising the BIC of the horizon-0
/// regression, compared on the sample that drops the first `max_lags` points.
pub fn select_lags_bic(response: &[f64], shock: &[f64], controls: &[&[f64]], max_lags: usize, trend: Trend) -> Result<usize> {
    check_inputs(response, shock, controls)?;
    if max_lags == 0 {
        return Err(Error::Config("max_lags must be at least 1".into()));
    }
    let n = response.len();
    let k_max = n_regressors(response, shock, controls.len(), max_lags, trend);
    if n <= max_lags + k_max {
        return Err(Error::InsufficientData(format!("{n} points for up to {max_lags} lags")));
    }
    let mut best = (f64::INFINITY, 1);
    for p in 1..=max_lags {
        let (x, y) = design(response, shock, controls, p, trend, max_lags..n, 0);
        let rss = ols(&x, &y)?.rss;
        let m = y.len() as f64;
        let bic = m * (rss / m).ln() + x.ncols() as f64 * m.ln();
        if bic < best.0 {
            best = (bic, p);
        }
    }
    Ok(best.1)
}

/// HAC covariance `(XᵀX)⁻¹ [Σ_{ℓ=0}^{L} w_ℓ (Γ_ℓ + Γ_ℓᵀ)] (XᵀX)⁻¹` with
/// Bartlett weights `w_ℓ = 1 − ℓ/(L+1)` (the `ℓ = 0` term counted once).
pub fn newey_west(x: &DMatrix<f64>, residuals: &DVector<f64>, truncation: usize) -> Result<DMatrix<f64>> {
    let (n, k) = x.shape();
    if residuals.len() != n {
        return Err(Error::Dimension(format!("{n} rows but {} residuals", residuals.len())));
    }
    let chol = checked_cholesky(&x.tr_mul(x)).ok_or_else(|| Error::Conditioning {
        subset: (0..k).collect(),
        message: "regressor cross-product matrix is singular".into(),
    })?;
    let bread = chol.inverse();
    // rows of the score matrix u_t x_t
    let scores = DMatrix::from_fn(n, k, |t, j| x[(t, j)] * residuals[t]);
    let mut meat = scores.tr_mul(&scores);
    for l in 1..=truncation.min(n.saturating_sub(1)) {
        let w = 1.0 - l as f64 / (truncation as f64 + 1.0);
        let gamma = scores.rows(l, n - l).tr_mul(&scores.rows(0, n - l));
        meat += (&gamma + gamma.transpose()) * w;
    }
    let mut cov = &bread * meat * &bread;
    crate::linalg::symmetrize(&mut cov);
    Ok(cov)
}

/// Impulse responses of `response` to a one-SD `shock` at horizons `0..=H`.
///
/// Every horizon uses the same estimation sample so points are comparable.
pub fn lp_irf(
    response: &[f64],
    shock: &[f64],
    controls: &[&[f64]],
    names: (&str, &str),
    control_names: &[String],
    cfg: &LpConfig,
) -> Result<IrfResult> {
    check_inputs(response, shock, controls)?;
    if cfg.horizons == 0 {
        return Err(Error::Config("need at least one horizon".into()));
    }
    let p = match cfg.lags {
        Some(p) => p,
        None => select_lags_bic(response, shock, controls, cfg.max_lags, cfg.trend)?,
    };
    let n = response.len();
    let k = n_regressors(response, shock, controls.len(), p, cfg.trend);
    if n <= cfg.horizons + p + k {
        return Err(Error::InsufficientData(format!(
            "{n} points for {} horizons, {p} lags and {k} regressors",
            cfg.horizons
        )));
    }
    let rows = p..n - cfg.horizons;
    let shock_sd = sample_variance(shock).sqrt();
    let mut points = Vec::with_capacity(cfg.horizons + 1);
    for h in 0..=cfg.horizons {
        let (x, y) = design(response, shock, controls, p, cfg.trend, rows.clone(), h);
        let fit = ols(&x, &y)?;
        let cov = newey_west(&x, &fit.residuals, h)?;
        let point = fit.coef[1] * shock_sd;
        let se = cov[(1, 1)].max(0.0).sqrt() * shock_sd;
        points.push(IrfPoint {
            h,
            point,
            se,
            lower: point - cfg.ci_multiplier * se,
            upper: point + cfg.ci_multiplier * se,
        });
    }
    Ok(IrfResult {
        shock: names.0.to_string(),
        response: names.1.to_string(),
        controls: control_names.to_vec(),
        lags: p,
        shock_sd,
        n_obs: rows.len(),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::min_eigenvalue;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    fn fixed(lags: usize, horizons: usize) -> LpConfig {
        LpConfig {
            horizons,
            lags: Some(lags),
            ..Default::default()
        }
    }

    #[test]
    fn self_shock_is_one_sd() {
        let s = noise(100, 1);
        let r = lp_irf(&s, &s, &[], ("s", "s"), &[], &fixed(0, 3)).unwrap();
        let sd = sample_variance(&s).sqrt();
        assert!((r.points[0].point - sd).abs() < 1e-12);
        assert!(r.points[0].se < 1e-8);
        let r = lp_irf(&s, &s, &[], ("s", "s"), &[], &fixed(2, 3)).unwrap();
        assert!((r.points[0].point - sd).abs() < 1e-12);
    }

    #[test]
    fn horizon_zero_matches_simple_slope() {
        let s = [0.5, -1.0, 2.0, 0.3, -0.7, 1.4, 0.9, -0.2, 0.1, 1.1, 0.0];
        let y = [1.2, -0.4, 3.1, 0.2, -1.5, 2.2, 1.0, 0.3, -0.1, 1.9, 0.5];
        let r = lp_irf(&y, &s, &[], ("s", "y"), &[], &fixed(0, 1)).unwrap();
        // sample rows t = 0..10 at h = 0
        let (sx, sy) = (&s[..10], &y[..10]);
        let (mx, my) = (sx.iter().sum::<f64>() / 10.0, sy.iter().sum::<f64>() / 10.0);
        let slope = sx.iter().zip(sy).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>()
            / sx.iter().map(|a| (a - mx).powi(2)).sum::<f64>();
        let sd = sample_variance(&s).sqrt();
        assert!((r.points[0].point - slope * sd).abs() < 1e-10);
    }

    #[test]
    fn constant_shift_of_response_changes_nothing() {
        let s = noise(120, 2);
        let y = noise(120, 3);
        let y2: Vec<f64> = y.iter().map(|v| v + 100.0).collect();
        let a = lp_irf(&y, &s, &[], ("s", "y"), &[], &fixed(2, 4)).unwrap();
        let b = lp_irf(&y2, &s, &[], ("s", "y"), &[], &fixed(2, 4)).unwrap();
        for (p, q) in a.points.iter().zip(&b.points) {
            assert!((p.point - q.point).abs() < 1e-10);
        }
    }

    #[test]
    fn white_covariance_at_zero_truncation() {
        let x = DMatrix::from_fn(40, 3, |i, j| if j == 0 { 1.0 } else { ((i * (j + 3)) % 7) as f64 - 3.0 });
        let u = DVector::from_vec(noise(40, 4));
        let nw = newey_west(&x, &u, 0).unwrap();
        let bread = x.tr_mul(&x).try_inverse().unwrap();
        let mut meat = DMatrix::zeros(3, 3);
        for t in 0..40 {
            let xt = x.row(t).transpose();
            meat += &xt * xt.transpose() * (u[t] * u[t]);
        }
        let white = &bread * meat * &bread;
        assert!((nw - white).amax() < 1e-10);
    }

    #[test]
    fn hac_covariance_is_psd() {
        for seed in 0..20 {
            let x = DMatrix::from_vec(30, 2, noise(60, seed));
            let u = DVector::from_vec(noise(30, seed + 50));
            let c = newey_west(&x, &u, 5).unwrap();
            assert!(min_eigenvalue(&c) >= -1e-10);
        }
    }

    #[test]
    fn iid_residuals_give_classical_errors() {
        let n = 4000;
        let x = DMatrix::from_fn(n, 2, |i, j| if j == 0 { 1.0 } else { ((i * 7919) % 1000) as f64 / 1000.0 });
        let u = DVector::from_vec(noise(n, 9));
        let nw = newey_west(&x, &u, 4).unwrap();
        let s2 = u.norm_squared() / (n - 2) as f64;
        let classical = x.tr_mul(&x).try_inverse().unwrap() * s2;
        assert!((nw[(1, 1)].sqrt() / classical[(1, 1)].sqrt() - 1.0).abs() < 0.1);
    }

    #[test]
    fn bic_picks_forced_and_true_orders() {
        let s = noise(400, 11);
        let y = noise(400, 12);
        assert_eq!(select_lags_bic(&y, &s, &[], 1, Trend::None).unwrap(), 1);
        let mut hits = 0;
        for seed in 0..10 {
            let e = noise(400, 100 + seed);
            let mut y = vec![0.0; 400];
            for t in 2..400 {
                y[t] = 0.5 * y[t - 1] + 0.3 * y[t - 2] + e[t];
            }
            hits += usize::from(select_lags_bic(&y, &s, &[], 8, Trend::None).unwrap() == 2);
        }
        assert!(hits >= 8, "{hits}");
    }

    #[test]
    fn bands_are_symmetric_and_rank_deficiency_errors() {
        let s = noise(80, 13);
        let y = noise(80, 14);
        let r = lp_irf(&y, &s, &[], ("s", "y"), &[], &fixed(1, 6)).unwrap();
        for p in &r.points {
            assert!(p.lower <= p.point && p.point <= p.upper);
            assert!(((p.upper - p.point) - (p.point - p.lower)).abs() < 1e-12);
        }
        let c = vec![1.0; 80];
        let ctrl: [&[f64]; 1] = [&s];
        assert!(lp_irf(&y, &s, &ctrl, ("s", "y"), &["dup".into()], &fixed(1, 2)).is_err());
        assert!(lp_irf(&y, &c, &[], ("c", "y"), &[], &fixed(1, 2)).is_err());
    }
}
