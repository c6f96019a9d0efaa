//! Dense reference computations shared by the integration tests. These use
//! joint-Gaussian algebra rather than the recursions under test.
#![allow(dead_code, clippy::needless_range_loop)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

pub fn logdet(a: &DMatrix<f64>) -> f64 {
    a.clone().lu().determinant().abs().ln()
}

/// `ln p(γ | y)` up to a constant, from the multivariate-t marginal of `y`:
/// `y ~ t_ν(X_γ b, (ss/ν)(I + X_γ Ω_γ X_γᵀ))`.
pub fn dense_log_marginal(
    x: &DMatrix<f64>,
    y: &[f64],
    omega_inv: &DMatrix<f64>,
    pi: &[f64],
    nu: f64,
    ss: f64,
    gamma: &[bool],
) -> f64 {
    let n = y.len();
    let idx: Vec<usize> = (0..gamma.len()).filter(|&k| gamma[k]).collect();
    let lp: f64 = gamma.iter().zip(pi).map(|(&g, &p)| if g { p.ln() } else { (1.0 - p).ln() }).sum();
    let y = DVector::from_column_slice(y);
    let mut s = DMatrix::<f64>::identity(n, n);
    if !idx.is_empty() {
        let xg = DMatrix::from_fn(n, idx.len(), |i, j| x[(i, idx[j])]);
        let og = DMatrix::from_fn(idx.len(), idx.len(), |i, j| omega_inv[(idx[i], idx[j])]);
        let omega = og.try_inverse().unwrap();
        s += &xg * omega * xg.transpose();
    }
    let q = (y.transpose() * s.clone().try_inverse().unwrap() * &y)[0];
    lp - 0.5 * logdet(&s) - 0.5 * (n as f64 + nu) * (ss + q).ln()
}

/// `E[β_γ | y, σ²]` via the Gaussian conditioning formula with prior mean zero.
pub fn dense_beta_mean(x: &DMatrix<f64>, y: &[f64], omega_inv: &DMatrix<f64>, idx: &[usize]) -> DVector<f64> {
    let n = y.len();
    let xg = DMatrix::from_fn(n, idx.len(), |i, j| x[(i, idx[j])]);
    let og = DMatrix::from_fn(idx.len(), idx.len(), |i, j| omega_inv[(idx[i], idx[j])]);
    let omega = og.try_inverse().unwrap();
    let s = DMatrix::<f64>::identity(n, n) + &xg * &omega * xg.transpose();
    &omega * xg.transpose() * s.try_inverse().unwrap() * DVector::from_column_slice(y)
}

/// Stacks a linear Gaussian state-space model into one joint Gaussian over
/// `(α_1..α_n, y_1..y_n)` and conditions on the observed `y`. Returns the
/// smoothed means and covariances plus the log density of the observed `y`.
pub fn dense_smoother(
    z: &DVector<f64>,
    t: &DMatrix<f64>,
    rqr: &DMatrix<f64>,
    h: f64,
    a1: &DVector<f64>,
    p1: &DMatrix<f64>,
    y: &[Option<f64>],
) -> (Vec<DVector<f64>>, Vec<DMatrix<f64>>, f64) {
    let n = y.len();
    let m = a1.len();
    // state means and covariances Cov(α_s, α_t)
    let mut means = vec![a1.clone()];
    let mut var = vec![p1.clone()];
    for i in 1..n {
        means.push(t * &means[i - 1]);
        var.push(t * &var[i - 1] * t.transpose() + rqr);
    }
    let mut cov = DMatrix::zeros(n * m, n * m);
    for s in 0..n {
        let mut c = var[s].clone();
        for u in s..n {
            // Cov(α_u, α_s) = T^{u-s} P_s
            cov.view_mut((u * m, s * m), (m, m)).copy_from(&c);
            cov.view_mut((s * m, u * m), (m, m)).copy_from(&c.transpose());
            c = t * c;
        }
    }
    let obs: Vec<usize> = (0..n).filter(|&i| y[i].is_some()).collect();
    let mut smean = Vec::with_capacity(n);
    let mut scov = Vec::with_capacity(n);
    if obs.is_empty() {
        for i in 0..n {
            smean.push(means[i].clone());
            scov.push(var[i].clone());
        }
        return (smean, scov, 0.0);
    }
    let k = obs.len();
    // Cov(α, y_j) = Cov(α, α_j) z; Var(y) = zᵀ Cov z + h I
    let mut cay = DMatrix::zeros(n * m, k);
    for (c, &j) in obs.iter().enumerate() {
        let col = cov.view((0, j * m), (n * m, m)) * z;
        cay.set_column(c, &col);
    }
    let mut vy = DMatrix::zeros(k, k);
    for (a, &i) in obs.iter().enumerate() {
        for (b, &j) in obs.iter().enumerate() {
            vy[(a, b)] = (z.transpose() * cov.view((i * m, j * m), (m, m)) * z)[0] + if a == b { h } else { 0.0 };
        }
    }
    let resid = DVector::from_fn(k, |c, _| y[obs[c]].unwrap() - z.dot(&means[obs[c]]));
    let vinv = vy.clone().try_inverse().unwrap();
    let loglik = -0.5 * (k as f64 * (2.0 * std::f64::consts::PI).ln() + logdet(&vy) + resid.dot(&(&vinv * &resid)));
    let gain = &cay * &vinv;
    let shift = &gain * resid;
    let post = &cov - &gain * cay.transpose();
    for i in 0..n {
        smean.push(&means[i] + shift.rows(i * m, m));
        scov.push(post.view((i * m, i * m), (m, m)).into_owned());
    }
    (smean, scov, loglik)
}
