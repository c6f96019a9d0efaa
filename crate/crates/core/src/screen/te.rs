use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{quantile_sorted, sorted_copy};
use crate::timeseries::diagnostics::plug_in_entropy;

/// Shortest usable overlap after lagging.
pub const MIN_TE_LENGTH: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TeConfig {
    pub lag: usize,
    pub bins: usize,
    pub shuffles: usize,
    pub alpha: f64,
}

impl Default for TeConfig {
    fn default() -> Self {
        Self {
            lag: 1,
            bins: 3,
            shuffles: 200,
            alpha: 0.05,
        }
    }
}

impl TeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lag == 0 || self.bins < 2 || !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config("transfer entropy needs lag ≥ 1, bins ≥ 2 and alpha in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Labels each value by the equal-frequency bin it falls in.
pub fn quantile_bins(x: &[f64], bins: usize) -> Result<Vec<usize>> {
    let sorted = sorted_copy(x);
    if sorted.first() == sorted.last() {
        return Err(Error::Domain("cannot bin a constant series".into()));
    }
    let edges: Vec<f64> = (1..bins).map(|j| quantile_sorted(&sorted, j as f64 / bins as f64)).collect();
    Ok(x.iter().map(|v| edges.iter().filter(|e| v > e).count()).collect())
}

fn joint_entropy(columns: &[&[usize]], bins: usize) -> f64 {
    let n = columns[0].len();
    let cells = bins.pow(columns.len() as u32);
    let mut counts = vec![0usize; cells];
    for t in 0..n {
        let idx = columns.iter().fold(0, |acc, c| acc * bins + c[t]);
        counts[idx] += 1;
    }
    plug_in_entropy(counts.into_iter(), n)
}

/// Transfer entropy from labelled source to labelled target at `lag`:
/// `H(Yᴾ,Xᴾ) − H(Yᶠ,Yᴾ,Xᴾ) + H(Yᶠ,Yᴾ) − H(Yᴾ)` in nats.
fn te_labels(x: &[usize], y: &[usize], lag: usize, bins: usize) -> f64 {
    let n = x.len();
    let yf = &y[lag..];
    let yp = &y[..n - lag];
    let xp = &x[..n - lag];
    let te = joint_entropy(&[yp, xp], bins) - joint_entropy(&[yf, yp, xp], bins) + joint_entropy(&[yf, yp], bins)
        - joint_entropy(&[yp], bins);
    te.max(0.0)
}

fn check(x: &[f64], y: &[f64], lag: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Alignment(format!("series lengths differ: {} vs {}", x.len(), y.len())));
    }
    if x.len() < lag + MIN_TE_LENGTH {
        return Err(Error::InsufficientData(format!(
            "transfer entropy needs at least {} points after lagging, got {}",
            MIN_TE_LENGTH,
            x.len().saturating_sub(lag)
        )));
    }
    Ok(())
}

/// Plug-in transfer entropy `TE(x → y)` over quantile bins.
pub fn transfer_entropy(x: &[f64], y: &[f64], lag: usize, bins: usize) -> Result<f64> {
    check(x, y, lag)?;
    Ok(te_labels(&quantile_bins(x, bins)?, &quantile_bins(y, bins)?, lag, bins))
}

/// `TE(x → y) − TE(y → x)`; positive when information flows toward `y`.
pub fn net_information_flow(x: &[f64], y: &[f64], lag: usize, bins: usize) -> Result<f64> {
    Ok(transfer_entropy(x, y, lag, bins)? - transfer_entropy(y, x, lag, bins)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TeResult {
    pub te: f64,
    pub net_flow: f64,
    /// Upper `1 − alpha` quantile of the surrogate distribution.
    pub threshold: f64,
    /// Share of surrogates at least as large as the observed value.
    pub p_value: f64,
    pub significant: bool,
}

/// Transfer entropy with a circular-shift surrogate test: the source is
/// rotated by a random offset, which breaks the coupling but keeps its
/// autocorrelation.
pub fn te_test<R: Rng + ?Sized>(x: &[f64], y: &[f64], cfg: &TeConfig, rng: &mut R) -> Result<TeResult> {
    cfg.validate()?;
    check(x, y, cfg.lag)?;
    let lx = quantile_bins(x, cfg.bins)?;
    let ly = quantile_bins(y, cfg.bins)?;
    let te = te_labels(&lx, &ly, cfg.lag, cfg.bins);
    let net_flow = te - te_labels(&ly, &lx, cfg.lag, cfg.bins);
    let n = x.len();
    let margin = (cfg.lag + 1).min(n / 4);
    let mut null = Vec::with_capacity(cfg.shuffles);
    let mut shifted = lx.clone();
    for _ in 0..cfg.shuffles {
        let shift = rng.random_range(margin..=n - margin);
        for (t, s) in shifted.iter_mut().enumerate() {
            *s = lx[(t + shift) % n];
        }
        null.push(te_labels(&shifted, &ly, cfg.lag, cfg.bins));
    }
    let sorted = sorted_copy(&null);
    let threshold = if sorted.is_empty() { f64::INFINITY } else { quantile_sorted(&sorted, 1.0 - cfg.alpha) };
    let exceed = null.iter().filter(|v| **v >= te).count();
    Ok(TeResult {
        te,
        net_flow,
        threshold,
        p_value: (exceed + 1) as f64 / (cfg.shuffles + 1) as f64,
        significant: te > threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    #[test]
    fn deterministic_copy_transfers_conditional_entropy() {
        let x = noise(600, 1);
        // circular shift so both series hold the same values and share bin edges
        let y: Vec<f64> = (0..x.len()).map(|t| x[(t + x.len() - 1) % x.len()]).collect();
        let te = transfer_entropy(&x, &y, 1, 3).unwrap();
        let ly = quantile_bins(&y, 3).unwrap();
        let n = ly.len();
        let h_cond = joint_entropy(&[&ly[1..], &ly[..n - 1]], 3) - joint_entropy(&[&ly[..n - 1]], 3);
        assert!((te - h_cond).abs() < 1e-12);
        assert!(h_cond > 0.5);
        assert!(transfer_entropy(&y, &x, 1, 3).unwrap() < 0.02);
        assert!(net_information_flow(&x, &y, 1, 3).unwrap() > 0.5);
    }

    #[test]
    fn identical_series_have_zero_net_flow() {
        let x = noise(200, 2);
        assert_eq!(net_information_flow(&x, &x, 1, 3).unwrap(), 0.0);
    }

    #[test]
    fn flow_is_antisymmetric() {
        for seed in 0..20 {
            let x = noise(120, seed);
            let y = noise(120, seed + 100);
            let a = net_information_flow(&x, &y, 2, 4).unwrap();
            let b = net_information_flow(&y, &x, 2, 4).unwrap();
            assert_eq!(a, -b);
        }
    }

    #[test]
    fn self_prediction_peaks_at_true_lag() {
        let base = noise(700, 3);
        let x: Vec<f64> = base[..600].to_vec();
        let y: Vec<f64> = (0..600).map(|t| if t >= 4 { x[t - 4] } else { base[650 + t] }).collect();
        let te: Vec<f64> = (1..=8).map(|l| transfer_entropy(&x, &y, l, 3).unwrap()).collect();
        let best = te.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0 + 1;
        assert_eq!(best, 4);
    }

    #[test]
    fn quantile_bins_are_balanced() {
        let x: Vec<f64> = (0..300).map(|i| i as f64).collect();
        let l = quantile_bins(&x, 3).unwrap();
        for b in 0..3 {
            assert_eq!(l.iter().filter(|v| **v == b).count(), 100);
        }
        assert!(quantile_bins(&[1.0; 10], 3).is_err());
    }

    #[test]
    fn short_series_rejected() {
        let x = noise(40, 4);
        assert!(matches!(transfer_entropy(&x, &x, 1, 3), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn coupled_pair_is_significant() {
        let x = noise(300, 5);
        let e = noise(300, 6);
        let y: Vec<f64> = (0..300).map(|t| if t > 0 { x[t - 1] + 0.3 * e[t] } else { e[t] }).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = te_test(&x, &y, &TeConfig::default(), &mut rng).unwrap();
        assert!(r.significant && r.p_value < 0.01);
    }
}
