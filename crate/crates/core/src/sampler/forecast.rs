use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::PosteriorDraws;
use crate::error::{Error, Result};
use crate::linalg::{quantile_sorted, sorted_copy};
use crate::timeseries::YearMonth;

/// Posterior-predictive summaries over `h` steps. `mean` is the point forecast.
#[derive(Debug, Clone, Serialize)]
pub struct ForecastResult {
    pub horizon: usize,
    pub level: f64,
    /// First forecast month when the fit carried dates.
    pub start: Option<YearMonth>,
    pub mean: Vec<f64>,
    pub median: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// One row per posterior draw, one column per step.
    #[serde(skip)]
    pub draws: DMatrix<f64>,
}

/// Simulates `h` steps ahead from the final state of every retained draw,
/// adding state noise, the regression offset `βᵀx_{T+j}` and observation noise.
///
/// `x_future` must have at least `h` rows when the fit used predictors.
/// `level` is the central interval coverage, e.g. `0.9`.
pub fn forecast(post: &PosteriorDraws, x_future: Option<&DMatrix<f64>>, h: usize, level: f64, seed: u64) -> Result<ForecastResult> {
    if h == 0 {
        return Err(Error::Config("forecast horizon must be positive".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Config(format!("interval level must lie in (0, 1), got {level}")));
    }
    if post.is_empty() {
        return Err(Error::InsufficientData("no posterior draws".into()));
    }
    let k = post.n_predictors();
    if k > 0 {
        match x_future {
            None => return Err(Error::Config(format!("forecasting needs {h} future rows for {k} predictors"))),
            Some(x) if x.nrows() < h || x.ncols() != k => {
                return Err(Error::Dimension(format!(
                    "future design is {}×{}, need at least {h}×{k}",
                    x.nrows(),
                    x.ncols()
                )))
            }
            Some(x) if x.iter().any(|v| !v.is_finite()) => {
                return Err(Error::NonFinite {
                    index: 0,
                    message: "future design".into(),
                })
            }
            _ => {}
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut paths = DMatrix::zeros(post.len(), h);
    for (i, d) in post.draws.iter().enumerate() {
        let model = post.model(i)?;
        let q_sd = model.q.map(|v| v.sqrt());
        let obs_sd = d.sigma2.sqrt();
        let beta = DVector::from_column_slice(&d.beta);
        let mut alpha = d.final_state.clone();
        for j in 0..h {
            let eta = DVector::from_fn(q_sd.len(), |r, _| q_sd[r] * rng.sample::<f64, _>(StandardNormal));
            alpha = &model.t * &alpha + &model.r * eta;
            let offset = x_future.map_or(0.0, |x| if k > 0 { x.row(j).transpose().dot(&beta) } else { 0.0 });
            let eps: f64 = rng.sample(StandardNormal);
            paths[(i, j)] = model.z.dot(&alpha) + offset + obs_sd * eps;
        }
    }
    let tail = (1.0 - level) / 2.0;
    let mut out = ForecastResult {
        horizon: h,
        level,
        start: post.start.map(|s| s.add_months(post.n as i64)),
        mean: Vec::with_capacity(h),
        median: Vec::with_capacity(h),
        lower: Vec::with_capacity(h),
        upper: Vec::with_capacity(h),
        draws: DMatrix::zeros(0, 0),
    };
    for j in 0..h {
        let col: Vec<f64> = paths.column(j).iter().copied().collect();
        let sorted = sorted_copy(&col);
        out.mean.push(col.iter().sum::<f64>() / col.len() as f64);
        out.median.push(quantile_sorted(&sorted, 0.5));
        out.lower.push(quantile_sorted(&sorted, tail));
        out.upper.push(quantile_sorted(&sorted, 1.0 - tail));
    }
    out.draws = paths;
    Ok(out)
}
