use nalgebra::{DMatrix, DVector};

use super::{FilterResult, StateSpaceModel};
use crate::error::{Error, Result};
use crate::linalg::symmetrize;

/// Fixed-interval smoothed moments `E[α_t | y]` and `Var[α_t | y]`.
#[derive(Debug, Clone)]
pub struct SmootherResult {
    pub mean: Vec<DVector<f64>>,
    pub cov: Vec<DMatrix<f64>>,
}

fn check(model: &StateSpaceModel, filter: &FilterResult) -> Result<()> {
    let m = model.state_dim();
    if filter.predicted_mean.first().is_some_and(|a| a.len() != m) {
        return Err(Error::Dimension(format!(
            "filter state dimension {} does not match model dimension {m}",
            filter.predicted_mean[0].len()
        )));
    }
    Ok(())
}

/// Backward state-smoothing recursion on the filter output:
///
/// ```text
/// r_{t−1} = z v_t / F_t + L_tᵀ r_t,       L_t = T (I − k_t zᵀ)
/// N_{t−1} = z zᵀ / F_t + L_tᵀ N_t L_t
/// α̂_t = a_t + P_t r_{t−1},  V_t = P_t − P_t N_{t−1} P_t
/// ```
///
/// Missing observations reduce the step to `r_{t−1} = Tᵀ r_t`. No matrix
/// inverse is needed, so singular predicted covariances are fine.
pub fn kalman_smoother(model: &StateSpaceModel, filter: &FilterResult) -> Result<SmootherResult> {
    check(model, filter)?;
    let m = model.state_dim();
    let n = filter.len();
    let mut mean = vec![DVector::zeros(m); n];
    let mut cov = vec![DMatrix::zeros(m, m); n];
    let mut r = DVector::<f64>::zeros(m);
    let mut nn = DMatrix::<f64>::zeros(m, m);
    let tt = model.t.transpose();
    for t in (0..n).rev() {
        let p = &filter.predicted_cov[t];
        match (filter.errors[t], filter.error_vars[t]) {
            (Some(v), Some(f)) => {
                let k = (p * &model.z) / f;
                let l = &model.t - (&model.t * &k) * model.z.transpose();
                r = &model.z * (v / f) + l.tr_mul(&r);
                nn = (&model.z * model.z.transpose()) / f + l.transpose() * &nn * &l;
            }
            _ => {
                r = &tt * &r;
                nn = &tt * &nn * &model.t;
            }
        }
        symmetrize(&mut nn);
        mean[t] = &filter.predicted_mean[t] + p * &r;
        let mut v = p - p * &nn * p;
        symmetrize(&mut v);
        cov[t] = v;
    }
    Ok(SmootherResult { mean, cov })
}

/// Smoothed means only; the `N_t` recursion is skipped.
pub fn smoothed_means(model: &StateSpaceModel, filter: &FilterResult) -> Result<Vec<DVector<f64>>> {
    check(model, filter)?;
    let n = filter.len();
    let mut mean = vec![DVector::zeros(model.state_dim()); n];
    let mut r = DVector::<f64>::zeros(model.state_dim());
    for t in (0..n).rev() {
        let p = &filter.predicted_cov[t];
        r = match (filter.errors[t], filter.error_vars[t]) {
            (Some(v), Some(f)) => {
                // Lᵀ r = (I − z kᵀ) Tᵀ r
                let ttr = model.t.tr_mul(&r);
                let k = (p * &model.z) / f;
                &model.z * (v / f) + &ttr - &model.z * k.dot(&ttr)
            }
            _ => model.t.tr_mul(&r),
        };
        mean[t] = &filter.predicted_mean[t] + p * &r;
    }
    Ok(mean)
}
