//! Conjugate spike-and-slab regression prior and its collapsed posterior.
//!
//! With inclusion indicators `γ`, the prior is
//!
//! ```text
//! γ_k ~ Bernoulli(π_k)
//! β_γ | σ², γ ~ N(b_γ, σ² Ω_γ)          (prior precision Ω_γ⁻¹ / σ²)
//! 1/σ² | γ   ~ Gamma(ν/2, ss/2)
//! Ω⁻¹ = κ (ω XᵀX + (1 − ω) diag(XᵀX)) / n
//! ```
//!
//! Given a residual series `y*`, β and σ² integrate out in closed form, which
//! gives the collapsed moves over `γ` used by [`gibbs_sweep_gamma`].

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{chol_logdet, checked_cholesky, sample_variance};

/// Hyperparameters for [`build_prior`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpikeSlabConfig {
    /// Expected number of included predictors `p̃`; `None` uses `min(1, K/2)`.
    pub expected_size: Option<f64>,
    /// Prior sample size `ν`; `None` uses `0.01·n`.
    pub nu: Option<f64>,
    pub expected_r2: f64,
    pub kappa: f64,
    pub omega: f64,
    /// Overrides `ss = ν (1 − R²) var(y)` when set.
    pub ss: Option<f64>,
}

impl Default for SpikeSlabConfig {
    fn default() -> Self {
        Self {
            expected_size: None,
            nu: None,
            expected_r2: 0.5,
            kappa: 1.0,
            omega: 0.5,
            ss: None,
        }
    }
}

impl SpikeSlabConfig {
    /// `(ν, ss)` for a response with `n` rows and sample variance `var_y`.
    pub fn sigma_prior(&self, n: usize, var_y: f64) -> Result<(f64, f64)> {
        let nu = self.nu.unwrap_or(0.01 * n as f64);
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::Config(format!("prior sample size must be positive, got {nu}")));
        }
        if !(self.expected_r2 > 0.0 && self.expected_r2 < 1.0) {
            return Err(Error::Config(format!("expected R² must lie in (0, 1), got {}", self.expected_r2)));
        }
        let ss = self.ss.unwrap_or(nu * (1.0 - self.expected_r2) * var_y);
        if !(ss > 0.0 && ss.is_finite()) {
            return Err(Error::Config(format!("prior sum of squares must be positive, got {ss}")));
        }
        Ok((nu, ss))
    }
}

#[derive(Debug, Clone)]
pub struct SpikeSlabPrior {
    pub pi: Vec<f64>,
    pub b: DVector<f64>,
    pub omega_inv: DMatrix<f64>,
    pub nu: f64,
    pub ss: f64,
    pub expected_size: f64,
    pub kappa: f64,
    pub omega: f64,
    /// Added to the diagonal when a factorisation fails.
    pub jitter: f64,
}

impl SpikeSlabPrior {
    pub fn k(&self) -> usize {
        self.pi.len()
    }

    /// `ln p(γ)`
    pub fn log_prior(&self, gamma: &[bool]) -> f64 {
        gamma
            .iter()
            .zip(&self.pi)
            .map(|(&g, &p)| if g { p.ln() } else { (1.0 - p).ln() })
            .sum()
    }
}

/// Builds the prior from the design `x` (n×K) and response `y`.
///
/// `ss` uses the sample variance of `y`.
pub fn build_prior(x: &DMatrix<f64>, y: &[f64], cfg: &SpikeSlabConfig) -> Result<SpikeSlabPrior> {
    let (n, k) = x.shape();
    if k == 0 {
        return Err(Error::Config("spike-and-slab prior needs at least one predictor".into()));
    }
    if y.len() != n {
        return Err(Error::Dimension(format!("design has {n} rows, response {}", y.len())));
    }
    let expected_size = cfg.expected_size.unwrap_or_else(|| (k as f64 / 2.0).min(1.0));
    if !(expected_size > 0.0 && expected_size < k as f64) {
        return Err(Error::Config(format!("expected model size must lie in (0, {k}), got {expected_size}")));
    }
    if !(0.0..=1.0).contains(&cfg.omega) || cfg.kappa.is_nan() || cfg.kappa <= 0.0 {
        return Err(Error::Config("need κ > 0 and ω in [0, 1]".into()));
    }
    let (nu, ss) = cfg.sigma_prior(n, sample_variance(y))?;
    let xtx = x.tr_mul(x);
    if let Some(j) = (0..k).find(|&j| {
        let col = x.column(j);
        let first = col[0];
        col.iter().all(|v| *v == first)
    }) {
        return Err(Error::Domain(format!("predictor {j} has zero variance")));
    }
    let mut omega_inv = &xtx * cfg.omega;
    for j in 0..k {
        omega_inv[(j, j)] += (1.0 - cfg.omega) * xtx[(j, j)];
    }
    omega_inv *= cfg.kappa / n as f64;
    let mean_diag = omega_inv.diagonal().mean();
    Ok(SpikeSlabPrior {
        pi: vec![expected_size / k as f64; k],
        b: DVector::zeros(k),
        omega_inv,
        nu,
        ss,
        expected_size,
        kappa: cfg.kappa,
        omega: cfg.omega,
        jitter: 1e-8 * mean_diag,
    })
}

/// Cross products of the design with one response.
#[derive(Debug, Clone)]
pub struct SufficientStats {
    pub xtx: DMatrix<f64>,
    pub xty: DVector<f64>,
    pub yty: f64,
    pub n: usize,
}

impl SufficientStats {
    pub fn new(x: &DMatrix<f64>, y_star: &[f64]) -> Result<Self> {
        if x.nrows() != y_star.len() {
            return Err(Error::Dimension(format!("design has {} rows, response {}", x.nrows(), y_star.len())));
        }
        let y = DVector::from_column_slice(y_star);
        Ok(Self {
            xtx: x.tr_mul(x),
            xty: x.tr_mul(&y),
            yty: y.norm_squared(),
            n: y_star.len(),
        })
    }

    /// Reuses a precomputed `XᵀX` for a new response.
    pub fn with_response(&self, x: &DMatrix<f64>, y_star: &[f64]) -> Self {
        let y = DVector::from_column_slice(y_star);
        Self {
            xtx: self.xtx.clone(),
            xty: x.tr_mul(&y),
            yty: y.norm_squared(),
            n: y_star.len(),
        }
    }
}

/// `V_γ⁻¹`, `β̃_γ`, `N` and `SS_γ` for one inclusion vector.
#[derive(Debug, Clone)]
pub struct PosteriorQuantities {
    pub included: Vec<usize>,
    pub v_inv: DMatrix<f64>,
    pub beta_tilde: DVector<f64>,
    pub n_post: f64,
    pub ss_post: f64,
    chol_v_inv: Option<Cholesky<f64, Dyn>>,
    logdet_omega_inv: f64,
}

impl PosteriorQuantities {
    pub fn logdet_v_inv(&self) -> f64 {
        self.chol_v_inv.as_ref().map_or(0.0, chol_logdet)
    }
}

fn included(gamma: &[bool]) -> Vec<usize> {
    gamma.iter().enumerate().filter(|(_, g)| **g).map(|(i, _)| i).collect()
}

fn submatrix(a: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| a[(idx[i], idx[j])])
}

fn factor(a: &DMatrix<f64>, jitter: f64, idx: &[usize], what: &str) -> Result<Cholesky<f64, Dyn>> {
    if let Some(c) = checked_cholesky(a) {
        return Ok(c);
    }
    log::debug!("adding jitter {jitter:e} to {what} for subset {idx:?}");
    let mut b = a.clone();
    for i in 0..b.nrows() {
        b[(i, i)] += jitter;
    }
    checked_cholesky(&b).ok_or_else(|| Error::Conditioning {
        subset: idx.to_vec(),
        message: format!("{what} is not positive definite"),
    })
}

pub fn posterior_from_stats(prior: &SpikeSlabPrior, stats: &SufficientStats, gamma: &[bool]) -> Result<PosteriorQuantities> {
    if gamma.len() != prior.k() || stats.xty.len() != prior.k() {
        return Err(Error::Dimension(format!("γ has {} entries for {} predictors", gamma.len(), prior.k())));
    }
    let idx = included(gamma);
    let n_post = stats.n as f64 + prior.nu;
    if idx.is_empty() {
        return Ok(PosteriorQuantities {
            included: idx,
            v_inv: DMatrix::zeros(0, 0),
            beta_tilde: DVector::zeros(0),
            n_post,
            ss_post: prior.ss + stats.yty,
            chol_v_inv: None,
            logdet_omega_inv: 0.0,
        });
    }
    let om = submatrix(&prior.omega_inv, &idx);
    let chol_om = factor(&om, prior.jitter, &idx, "prior precision")?;
    let v_inv = submatrix(&stats.xtx, &idx) + &om;
    let chol_v = factor(&v_inv, prior.jitter, &idx, "posterior precision")?;
    let b = DVector::from_fn(idx.len(), |i, _| prior.b[idx[i]]);
    let om_b = &om * &b;
    let rhs = DVector::from_fn(idx.len(), |i, _| stats.xty[idx[i]]) + &om_b;
    let beta_tilde = chol_v.solve(&rhs);
    // β̃ᵀ V⁻¹ β̃ = β̃ᵀ rhs
    let ss_post = prior.ss + stats.yty + b.dot(&om_b) - beta_tilde.dot(&rhs);
    if !(ss_post > 0.0 && ss_post.is_finite()) {
        return Err(Error::Conditioning {
            subset: idx,
            message: format!("adjusted sum of squares {ss_post} not positive"),
        });
    }
    Ok(PosteriorQuantities {
        logdet_omega_inv: chol_logdet(&chol_om),
        included: idx,
        v_inv,
        beta_tilde,
        n_post,
        ss_post,
        chol_v_inv: Some(chol_v),
    })
}

/// Posterior quantities for design `x`, residual response `y_star` and `γ`.
pub fn posterior_quantities(
    prior: &SpikeSlabPrior,
    x: &DMatrix<f64>,
    y_star: &[f64],
    gamma: &[bool],
) -> Result<PosteriorQuantities> {
    posterior_from_stats(prior, &SufficientStats::new(x, y_star)?, gamma)
}

fn log_marginal_from(prior: &SpikeSlabPrior, gamma: &[bool], pq: &PosteriorQuantities) -> f64 {
    prior.log_prior(gamma) + 0.5 * (pq.logdet_omega_inv - pq.logdet_v_inv()) - 0.5 * pq.n_post * pq.ss_post.ln()
}

/// `ln p(γ | y*)` up to a constant independent of `γ`:
///
/// `ln p(γ) + ½ ln|Ω_γ⁻¹| − ½ ln|V_γ⁻¹| − (N/2) ln SS_γ`
pub fn log_marginal_from_stats(prior: &SpikeSlabPrior, stats: &SufficientStats, gamma: &[bool]) -> Result<f64> {
    let pq = posterior_from_stats(prior, stats, gamma)?;
    Ok(log_marginal_from(prior, gamma, &pq))
}

pub fn log_marginal_gamma(prior: &SpikeSlabPrior, x: &DMatrix<f64>, y_star: &[f64], gamma: &[bool]) -> Result<f64> {
    log_marginal_from_stats(prior, &SufficientStats::new(x, y_star)?, gamma)
}

/// One systematic-scan sweep over `γ` in column order. Each coordinate is
/// redrawn from its full conditional under the collapsed posterior.
pub fn gibbs_sweep_gamma<R: Rng + ?Sized>(
    prior: &SpikeSlabPrior,
    stats: &SufficientStats,
    gamma: &mut [bool],
    rng: &mut R,
) -> Result<()> {
    let mut current = log_marginal_from_stats(prior, stats, gamma)?;
    for k in 0..gamma.len() {
        let was = gamma[k];
        gamma[k] = !was;
        let flipped = log_marginal_from_stats(prior, stats, gamma)?;
        let (lm_in, lm_out) = if was { (current, flipped) } else { (flipped, current) };
        let p_in = 1.0 / (1.0 + (lm_out - lm_in).exp());
        let include = rng.random::<f64>() < p_in;
        gamma[k] = include;
        if include != was {
            current = flipped;
        }
    }
    Ok(())
}

/// Draws `1/σ² ~ Gamma(N/2, SS_γ/2)` then `β_γ ~ N(β̃_γ, σ² V_γ)`; excluded
/// coefficients are exactly zero.
pub fn draw_beta_sigma_from_stats<R: Rng + ?Sized>(
    prior: &SpikeSlabPrior,
    stats: &SufficientStats,
    gamma: &[bool],
    rng: &mut R,
) -> Result<(DVector<f64>, f64)> {
    let pq = posterior_from_stats(prior, stats, gamma)?;
    let precision = Gamma::new(pq.n_post / 2.0, 2.0 / pq.ss_post)
        .map_err(|e| Error::Conditioning {
            subset: pq.included.clone(),
            message: e.to_string(),
        })?
        .sample(rng);
    let sigma2 = 1.0 / precision;
    let mut beta = DVector::zeros(prior.k());
    if let Some(chol) = &pq.chol_v_inv {
        let z = DVector::from_fn(pq.included.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
        // L Lᵀ = V⁻¹, so L⁻ᵀ z has covariance V
        let dev = chol.l().transpose().solve_upper_triangular(&z).expect("triangular factor is nonsingular");
        for (i, &j) in pq.included.iter().enumerate() {
            beta[j] = pq.beta_tilde[i] + sigma2.sqrt() * dev[i];
        }
    }
    Ok((beta, sigma2))
}

pub fn draw_beta_sigma<R: Rng + ?Sized>(
    prior: &SpikeSlabPrior,
    x: &DMatrix<f64>,
    y_star: &[f64],
    gamma: &[bool],
    rng: &mut R,
) -> Result<(DVector<f64>, f64)> {
    draw_beta_sigma_from_stats(prior, &SufficientStats::new(x, y_star)?, gamma, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fixture(n: usize, k: usize, seed: u64) -> (DMatrix<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(n, k, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y = (0..n)
            .map(|i| 1.5 * x[(i, 0)] - 0.7 * x[(i, k - 1)] + rng.sample::<f64, _>(StandardNormal))
            .collect();
        (x, y)
    }

    #[test]
    fn common_inclusion_probability() {
        let (x, y) = fixture(30, 10, 1);
        let cfg = SpikeSlabConfig {
            expected_size: Some(1.0),
            ..Default::default()
        };
        let prior = build_prior(&x, &y, &cfg).unwrap();
        assert!(prior.pi.iter().all(|p| (*p - 0.1).abs() < 1e-15));
        assert_eq!(prior.kappa, 1.0);
        assert_eq!(prior.omega, 0.5);
    }

    #[test]
    fn orthonormal_design_gives_diagonal_precision() {
        // columns e_1·√n-scaled orthogonal indicator blocks
        let n = 8;
        let x = DMatrix::from_fn(n, 2, |i, j| if (i < 4) == (j == 0) { 0.5 } else { 0.0 });
        let y: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let cfg = SpikeSlabConfig {
            expected_size: Some(1.0),
            ..Default::default()
        };
        let prior = build_prior(&x, &y, &cfg).unwrap();
        // XᵀX = I, so Ω⁻¹ = (½ I + ½ I)/n = I/n
        for i in 0..2 {
            for j in 0..2 {
                let expected = if i == j { 1.0 / n as f64 } else { 0.0 };
                assert!((prior.omega_inv[(i, j)] - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_variance_column_rejected() {
        let x = DMatrix::from_fn(5, 2, |i, j| if j == 0 { 1.0 } else { i as f64 });
        let y = vec![1.0, 2.0, 3.0, 4.0, 6.0];
        assert!(build_prior(&x, &y, &SpikeSlabConfig::default()).is_err());
    }

    #[test]
    fn empty_gamma_collapses() {
        let (x, y) = fixture(20, 3, 2);
        let prior = build_prior(&x, &y, &SpikeSlabConfig::default()).unwrap();
        let pq = posterior_quantities(&prior, &x, &y, &[false; 3]).unwrap();
        let yty: f64 = y.iter().map(|v| v * v).sum();
        assert!((pq.ss_post - (prior.ss + yty)).abs() < 1e-12);
        assert_eq!(pq.beta_tilde.len(), 0);
    }

    #[test]
    fn scalar_hand_computation() {
        let x = DMatrix::from_column_slice(4, 1, &[1.0, 2.0, -1.0, 0.5]);
        let y = [2.0, 3.5, -1.0, 1.0];
        let cfg = SpikeSlabConfig {
            expected_size: Some(0.5),
            nu: Some(1.0),
            ss: Some(0.5),
            ..Default::default()
        };
        let prior = build_prior(&x, &y, &cfg).unwrap();
        let xtx: f64 = 1.0 + 4.0 + 1.0 + 0.25;
        let xty: f64 = 2.0 + 7.0 + 1.0 + 0.5;
        let om = xtx / 4.0;
        let beta = xty / (xtx + om);
        let pq = posterior_quantities(&prior, &x, &y, &[true]).unwrap();
        assert!((pq.beta_tilde[0] - beta).abs() < 1e-14);
        let yty: f64 = y.iter().map(|v| v * v).sum();
        let ss = 0.5 + yty - beta * beta * (xtx + om);
        assert!((pq.ss_post - ss).abs() < 1e-12);
        assert!(pq.ss_post <= 0.5 + yty);
    }

    #[test]
    fn identical_gamma_has_zero_log_odds() {
        let (x, y) = fixture(25, 4, 3);
        let prior = build_prior(&x, &y, &SpikeSlabConfig::default()).unwrap();
        let g = [true, false, true, false];
        let a = log_marginal_gamma(&prior, &x, &y, &g).unwrap();
        let b = log_marginal_gamma(&prior, &x, &y, &g).unwrap();
        assert_eq!(a - b, 0.0);
    }

    #[test]
    fn orthogonal_null_predictor_odds_are_prior_and_determinants() {
        // column 1 is orthogonal to y and to column 0
        let x = DMatrix::from_row_slice(4, 2, &[1.0, 1.0, 1.0, -1.0, -1.0, 1.0, -1.0, -1.0]);
        let y = [2.0, 2.2, -1.9, -2.1];
        let cfg = SpikeSlabConfig {
            expected_size: Some(1.0),
            nu: Some(1.0),
            ss: Some(1.0),
            ..Default::default()
        };
        let prior = build_prior(&x, &y, &cfg).unwrap();
        let with = log_marginal_gamma(&prior, &x, &y, &[true, true]).unwrap();
        let without = log_marginal_gamma(&prior, &x, &y, &[true, false]).unwrap();
        // XᵀX = 4I, Ω⁻¹ = I; adding column 1: |Ω⁻¹| ratio 1, |V⁻¹| ratio 5, SS unchanged
        let expected = (0.5f64).ln() - (0.5f64).ln() + 0.5 * (1.0f64.ln() - 5.0f64.ln());
        assert!((with - without - expected).abs() < 1e-12);
    }

    #[test]
    fn duplicated_columns_are_exchangeable() {
        let (mut x, y) = fixture(30, 3, 4);
        let col = x.column(0).clone_owned();
        x.set_column(2, &col);
        let prior = build_prior(&x, &y, &SpikeSlabConfig::default()).unwrap();
        let a = log_marginal_gamma(&prior, &x, &y, &[true, true, false]).unwrap();
        let b = log_marginal_gamma(&prior, &x, &y, &[false, true, true]).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn scaling_response_preserves_odds() {
        let (x, y) = fixture(30, 3, 5);
        let c = 3.7;
        let cfg = SpikeSlabConfig {
            ss: Some(2.0),
            ..Default::default()
        };
        let prior = build_prior(&x, &y, &cfg).unwrap();
        let ys: Vec<f64> = y.iter().map(|v| v * c).collect();
        let prior_s = build_prior(&x, &ys, &SpikeSlabConfig { ss: Some(2.0 * c * c), ..cfg.clone() }).unwrap();
        for g in [[true, false, false], [true, true, false], [false, false, true]] {
            let pq = posterior_quantities(&prior, &x, &y, &g).unwrap();
            let pqs = posterior_quantities(&prior_s, &x, &ys, &g).unwrap();
            assert!((pqs.ss_post / pq.ss_post - c * c).abs() < 1e-10);
        }
        let d = log_marginal_gamma(&prior, &x, &y, &[true, false, false]).unwrap()
            - log_marginal_gamma(&prior, &x, &y, &[false, true, true]).unwrap();
        let ds = log_marginal_gamma(&prior_s, &x, &ys, &[true, false, false]).unwrap()
            - log_marginal_gamma(&prior_s, &x, &ys, &[false, true, true]).unwrap();
        assert!((d - ds).abs() < 1e-9);
    }

    #[test]
    fn vanishing_prior_inclusion_empties_gamma() {
        let (x, y) = fixture(40, 3, 6);
        let mut prior = build_prior(&x, &y, &SpikeSlabConfig::default()).unwrap();
        prior.pi = vec![1e-12; 3];
        let stats = SufficientStats::new(&x, &y).unwrap();
        let mut g = vec![true; 3];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut hits = 0;
        for _ in 0..10_000 {
            gibbs_sweep_gamma(&prior, &stats, &mut g, &mut rng).unwrap();
            hits += g.iter().filter(|v| **v).count();
        }
        assert!((hits as f64) / 10_000.0 < 0.01);
    }

    #[test]
    fn sweeps_are_reproducible() {
        let (x, y) = fixture(30, 5, 7);
        let prior = build_prior(&x, &y, &SpikeSlabConfig::default()).unwrap();
        let stats = SufficientStats::new(&x, &y).unwrap();
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let mut g = vec![false; 5];
            let mut trace = Vec::new();
            for _ in 0..50 {
                gibbs_sweep_gamma(&prior, &stats, &mut g, &mut rng).unwrap();
                trace.push(g.clone());
                trace.push(vec![draw_beta_sigma_from_stats(&prior, &stats, &g, &mut rng).unwrap().1 > 1.0]);
            }
            trace
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn beta_is_zero_off_support() {
        let (x, y) = fixture(30, 4, 8);
        let prior = build_prior(&x, &y, &SpikeSlabConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (beta, s2) = draw_beta_sigma(&prior, &x, &y, &[false, true, false, true], &mut rng).unwrap();
        assert_eq!(beta[0], 0.0);
        assert_eq!(beta[2], 0.0);
        assert!(beta[1] != 0.0 && s2 > 0.0);
    }
}
