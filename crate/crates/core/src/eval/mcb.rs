use nalgebra::DMatrix;
use serde::Serialize;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Ranks `values` ascending from 1, giving ties their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// CDF of the range of `m` independent standard normals:
/// `m ∫ φ(z) [Φ(z) − Φ(z − q)]^{m−1} dz`, by composite Simpson.
pub fn studentized_range_cdf(q: f64, m: usize) -> f64 {
    if q <= 0.0 {
        return 0.0;
    }
    let n = Normal::standard();
    let (a, b, steps) = (-9.0, 9.0 + q, 4000);
    let width = (b - a) / steps as f64;
    let f = |z: f64| n.pdf(z) * (n.cdf(z) - n.cdf(z - q)).powi(m as i32 - 1);
    let mut s = f(a) + f(b);
    for i in 1..steps {
        let z = a + i as f64 * width;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(z);
    }
    (m as f64 * s * width / 3.0).min(1.0)
}

/// Upper-`alpha` quantile of the studentized range with infinite degrees of freedom.
pub fn studentized_range_quantile(alpha: f64, m: usize) -> Result<f64> {
    if m < 2 || !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!("studentized range needs m ≥ 2 and alpha in (0, 1), got m = {m}, alpha = {alpha}")));
    }
    let target = 1.0 - alpha;
    let (mut lo, mut hi) = (0.0, 20.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if studentized_range_cdf(mid, m) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McbResult {
    pub models: Vec<String>,
    pub datasets: usize,
    pub alpha: f64,
    pub mean_ranks: Vec<f64>,
    /// Studentized-range quantile used for the width.
    pub q: f64,
    /// `q √(M(M+1)/(12D))`
    pub half_width: f64,
    pub best: usize,
    /// Upper end of the best model's interval.
    pub best_upper: f64,
    /// Interval lies wholly above the best model's upper limit.
    pub worse_than_best: Vec<bool>,
}

/// Multiple comparisons with the best on a `D × M` error matrix (rows are
/// datasets, columns models; lower error ranks better).
pub fn mcb(errors: &DMatrix<f64>, models: &[String], alpha: f64) -> Result<McbResult> {
    let (d, m) = errors.shape();
    if d < 2 || m < 2 {
        return Err(Error::InsufficientData(format!("MCB needs at least 2 datasets and 2 models, got {d}×{m}")));
    }
    if models.len() != m {
        return Err(Error::Dimension(format!("{} model names for {m} columns", models.len())));
    }
    if errors.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            index: 0,
            message: "MCB error matrix has missing or non-finite cells".into(),
        });
    }
    let mut sums = vec![0.0; m];
    for r in 0..d {
        let row: Vec<f64> = errors.row(r).iter().copied().collect();
        for (s, rank) in sums.iter_mut().zip(average_ranks(&row)) {
            *s += rank;
        }
    }
    let mean_ranks: Vec<f64> = sums.iter().map(|s| s / d as f64).collect();
    let q = studentized_range_quantile(alpha, m)?;
    let half_width = q * ((m * (m + 1)) as f64 / (12.0 * d as f64)).sqrt();
    let best = (0..m).min_by(|&a, &b| mean_ranks[a].total_cmp(&mean_ranks[b])).unwrap_or(0);
    let best_upper = mean_ranks[best] + half_width;
    Ok(McbResult {
        models: models.to_vec(),
        datasets: d,
        alpha,
        worse_than_best: mean_ranks.iter().map(|r| r - half_width > best_upper).collect(),
        mean_ranks,
        q,
        half_width,
        best,
        best_upper,
    })
}
