use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{kalman_filter, smoothed_means, StateSpaceModel};
use crate::error::{Error, Result};
use crate::linalg::psd_factor;

/// One posterior draw of the full state path; column `t` is `α_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateDraw {
    pub states: DMatrix<f64>,
}

impl StateDraw {
    pub fn state(&self, t: usize) -> DVector<f64> {
        self.states.column(t).clone_owned()
    }

    /// `Zᵀ α_t` for every `t`.
    pub fn signal(&self, model: &StateSpaceModel) -> Vec<f64> {
        (0..self.states.ncols()).map(|t| model.z.dot(&self.states.column(t))).collect()
    }
}

fn normal_vec<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Draws `α ~ p(α | y, model)` with the mean-correction simulation smoother:
/// simulate `(α⁺, y⁺)` from the model, then return
/// `α⁺ + E[α | y − y⁺]` where the correction is smoothed from a zero mean.
pub fn simulate_states<R: Rng + ?Sized>(model: &StateSpaceModel, y: &[Option<f64>], rng: &mut R) -> Result<StateDraw> {
    let m = model.state_dim();
    let n = y.len();
    let init_factor = psd_factor(&model.p1);
    let q_sd = model.q.map(|v| v.max(0.0).sqrt());
    let obs_sd = model.obs_variance.max(0.0).sqrt();

    let mut plus = DMatrix::zeros(m, n);
    let mut diff = Vec::with_capacity(n);
    let mut alpha = &model.a1 + &init_factor * normal_vec(rng, m);
    for (t, obs) in y.iter().enumerate() {
        plus.set_column(t, &alpha);
        let eps: f64 = rng.sample(StandardNormal);
        let y_plus = model.z.dot(&alpha) + obs_sd * eps;
        diff.push(obs.map(|v| v - y_plus));
        let eta = normal_vec(rng, model.q.len()).component_mul(&q_sd);
        alpha = &model.t * &alpha + &model.r * eta;
    }

    let mut centred = model.clone();
    centred.a1 = DVector::zeros(m);
    let filter = kalman_filter(&centred, &diff)?;
    let correction = smoothed_means(&centred, &filter)?;
    for (t, c) in correction.iter().enumerate() {
        let mut col = plus.column_mut(t);
        col += c;
        if col.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                index: t,
                message: "simulated state".into(),
            });
        }
    }
    Ok(StateDraw { states: plus })
}
