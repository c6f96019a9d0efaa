use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ols;
use crate::statespace::{spectral_radius, Component};

/// Number of stationarity rejections tolerated per AR draw.
pub const MAX_AR_TRIES: usize = 1000;

/// Inverse-Gamma hyperprior `IG(shape, scale)` shared by every component variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariancePrior {
    pub shape: f64,
    pub scale: f64,
}

impl VariancePrior {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0 && scale > 0.0 && shape.is_finite() && scale.is_finite()) {
            return Err(Error::Config(format!("inverse-Gamma prior needs positive shape and scale, got ({shape}, {scale})")));
        }
        Ok(Self { shape, scale })
    }
}

/// Draws `σ² ~ IG(shape, rate)` by inverting a Gamma draw.
pub(crate) fn inverse_gamma<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> f64 {
    match Gamma::new(shape, 1.0 / rate) {
        Ok(g) => 1.0 / g.sample(rng),
        Err(_) => f64::NAN,
    }
}

fn variance_draw<R: Rng + ?Sized>(prior: &VariancePrior, resid: &[f64], rng: &mut R) -> f64 {
    let ss: f64 = resid.iter().map(|r| r * r).sum();
    inverse_gamma(prior.shape + resid.len() as f64 / 2.0, prior.scale + ss / 2.0, rng)
}

/// Redraws every component's parameters given a state path.
///
/// `states` stacks the component blocks in order (rows) over time (columns).
/// Variances come from their conjugate inverse-Gamma conditionals; AR
/// coefficients from the flat-prior Gaussian conditional, redrawn until the
/// companion matrix is stationary.
pub fn draw_component_params<R: Rng + ?Sized>(
    components: &[Component],
    states: &DMatrix<f64>,
    prior: &VariancePrior,
    rng: &mut R,
) -> Result<Vec<Component>> {
    let dim: usize = components.iter().map(Component::state_dim).sum();
    if states.nrows() != dim {
        return Err(Error::Dimension(format!("state path has {} rows, components need {dim}", states.nrows())));
    }
    let n = states.ncols();
    if n < 2 {
        return Err(Error::InsufficientData("need at least two time points to draw state variances".into()));
    }
    let mut out = Vec::with_capacity(components.len());
    let mut offset = 0;
    for c in components {
        let row = |i: usize, t: usize| states[(offset + i, t)];
        let next = match c {
            Component::LocalLevel { .. } => {
                let u: Vec<f64> = (0..n - 1).map(|t| row(0, t + 1) - row(0, t)).collect();
                Component::local_level(variance_draw(prior, &u, rng))
            }
            Component::LocalLinearTrend { .. } => {
                let u: Vec<f64> = (0..n - 1).map(|t| row(0, t + 1) - row(0, t) - row(1, t)).collect();
                let v: Vec<f64> = (0..n - 1).map(|t| row(1, t + 1) - row(1, t)).collect();
                Component::local_linear_trend(variance_draw(prior, &u, rng), variance_draw(prior, &v, rng))
            }
            Component::Seasonal { period, .. } => {
                let m = period - 1;
                let w: Vec<f64> = (0..n - 1)
                    .map(|t| row(0, t + 1) + (0..m).map(|i| row(i, t)).sum::<f64>())
                    .collect();
                Component::seasonal(*period, variance_draw(prior, &w, rng))
            }
            Component::Ar { coefficients, sigma2 } => {
                let p = coefficients.len();
                let x = DMatrix::from_fn(n - 1, p, |t, j| row(j, t));
                let y = DVector::from_fn(n - 1, |t, _| row(0, t + 1));
                let phi = draw_ar_coefficients(&x, &y, *sigma2, rng)?;
                let resid: Vec<f64> = (0..n - 1).map(|t| y[t] - x.row(t).dot(&phi.transpose())).collect();
                Component::ar(phi.iter().copied().collect(), variance_draw(prior, &resid, rng))
            }
        };
        for v in next.variances() {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::NonFinite {
                    index: offset,
                    message: format!("{} variance draw {v}", c.name()),
                });
            }
        }
        offset += c.state_dim();
        out.push(next);
    }
    Ok(out)
}

/// `φ ~ N(φ̂, σ² (XᵀX)⁻¹)` restricted to the stationary region.
fn draw_ar_coefficients<R: Rng + ?Sized>(x: &DMatrix<f64>, y: &DVector<f64>, sigma2: f64, rng: &mut R) -> Result<DVector<f64>> {
    let fit = ols(x, y)?;
    let cov = &fit.xtx_inv * sigma2;
    let chol = cov.cholesky().ok_or_else(|| Error::Conditioning {
        subset: (0..x.ncols()).collect(),
        message: "AR conditional covariance is not positive definite".into(),
    })?;
    let l = chol.l();
    for _ in 0..MAX_AR_TRIES {
        let z = DVector::from_fn(x.ncols(), |_, _| rng.sample::<f64, _>(StandardNormal));
        let phi = &fit.coef + &l * z;
        let coeffs: Vec<f64> = phi.iter().copied().collect();
        if spectral_radius(&coeffs) < 1.0 {
            return Ok(phi);
        }
    }
    Err(Error::Stationarity { tries: MAX_AR_TRIES })
}
