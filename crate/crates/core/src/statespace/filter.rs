use nalgebra::{DMatrix, DVector};

use super::StateSpaceModel;
use crate::error::{Error, Result};
use crate::linalg::symmetrize;

const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// Output of [`kalman_filter`]. Index `t` refers to time `t` of the input.
#[derive(Debug, Clone)]
pub struct FilterResult {
    /// `a_t = E[α_t | y_{<t}]`
    pub predicted_mean: Vec<DVector<f64>>,
    pub predicted_cov: Vec<DMatrix<f64>>,
    /// `E[α_t | y_{≤t}]`
    pub filtered_mean: Vec<DVector<f64>>,
    pub filtered_cov: Vec<DMatrix<f64>>,
    /// One-step prediction error `v_t`; `None` where `y_t` is missing.
    pub errors: Vec<Option<f64>>,
    /// Prediction-error variance `F_t`; `None` where `y_t` is missing.
    pub error_vars: Vec<Option<f64>>,
    pub log_likelihood: f64,
}

impl FilterResult {
    pub fn len(&self) -> usize {
        self.errors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Runs the predict/update recursions. Missing observations skip the update.
///
/// Covariance updates use the Joseph form `(I − k zᵀ) P (I − k zᵀ)ᵀ + σ² k kᵀ`
/// and are symmetrised each step.
pub fn kalman_filter(model: &StateSpaceModel, y: &[Option<f64>]) -> Result<FilterResult> {
    let m = model.state_dim();
    let n = y.len();
    if model.a1.len() != m || model.p1.shape() != (m, m) {
        return Err(Error::Dimension("initial state does not match model".into()));
    }
    let h = model.obs_variance;
    if !(h.is_finite() && h >= 0.0) {
        return Err(Error::NonFinite {
            index: 0,
            message: format!("observation variance {h}"),
        });
    }
    let rqr = model.state_noise_cov();
    let tt = model.t.transpose();
    let mut out = FilterResult {
        predicted_mean: Vec::with_capacity(n),
        predicted_cov: Vec::with_capacity(n),
        filtered_mean: Vec::with_capacity(n),
        filtered_cov: Vec::with_capacity(n),
        errors: Vec::with_capacity(n),
        error_vars: Vec::with_capacity(n),
        log_likelihood: 0.0,
    };
    let mut a = model.a1.clone();
    let mut p = model.p1.clone();
    let identity = DMatrix::<f64>::identity(m, m);
    for (t, obs) in y.iter().enumerate() {
        let (af, pf, v, f) = match obs {
            Some(yt) => {
                if !yt.is_finite() {
                    return Err(Error::NonFinite {
                        index: t,
                        message: format!("observation {yt}"),
                    });
                }
                let pz = &p * &model.z;
                let f = model.z.dot(&pz) + h;
                if !(f.is_finite() && f > 0.0) {
                    return Err(Error::NonFinite {
                        index: t,
                        message: format!("prediction-error variance {f}"),
                    });
                }
                let v = yt - model.z.dot(&a);
                let k = pz / f;
                let af = &a + &k * v;
                let ikz = &identity - &k * model.z.transpose();
                let mut pf = &ikz * &p * ikz.transpose() + (&k * k.transpose()) * h;
                symmetrize(&mut pf);
                out.log_likelihood -= 0.5 * (LN_2PI + f.ln() + v * v / f);
                (af, pf, Some(v), Some(f))
            }
            None => (a.clone(), p.clone(), None, None),
        };
        if af.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                index: t,
                message: "filtered state".into(),
            });
        }
        let a_next = &model.t * &af;
        let mut p_next = &model.t * &pf * &tt + &rqr;
        symmetrize(&mut p_next);
        out.predicted_mean.push(std::mem::replace(&mut a, a_next));
        out.predicted_cov.push(std::mem::replace(&mut p, p_next));
        out.filtered_mean.push(af);
        out.filtered_cov.push(pf);
        out.errors.push(v);
        out.error_vars.push(f);
    }
    Ok(out)
}
