use serde::Serialize;

use super::TimeSeries;
use crate::error::{Error, Result};
use crate::linalg::{mean, quantile_sorted, sample_variance, sorted_copy};

/// Summary statistics and distributional characteristics of one series.
///
/// `entropy` is the Shannon entropy (nats) of an equal-width histogram over
/// `[min, max]` with `entropy_bins` bins. `entropy_distinct` is the plug-in
/// entropy of the empirical distribution over distinct values, which equals
/// `ln n` when no value repeats.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsReport {
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub mean: f64,
    pub q3: f64,
    pub max: f64,
    pub sd: f64,
    /// `100 · sd / mean`
    pub cov: f64,
    pub entropy: f64,
    pub entropy_bins: usize,
    pub entropy_distinct: f64,
    pub skewness: Option<f64>,
    pub excess_kurtosis: Option<f64>,
    pub raw_kurtosis: Option<f64>,
    pub hurst: Option<f64>,
    /// Why `hurst` is absent, if it is.
    pub hurst_flag: Option<String>,
}

/// Computes the diagnostics over the observed values of `s`.
///
/// `bins = None` uses `⌈√n⌉` histogram bins.
pub fn diagnostics(s: &TimeSeries, bins: Option<usize>) -> Result<DiagnosticsReport> {
    let x = s.observed();
    let n = x.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("series {:?} has {n} observed values", s.name())));
    }
    let bins = bins.unwrap_or_else(|| (n as f64).sqrt().ceil() as usize);
    if bins < 2 {
        return Err(Error::Config(format!("histogram needs at least 2 bins, got {bins}")));
    }
    let sorted = sorted_copy(&x);
    let m = mean(&x);
    if m == 0.0 {
        return Err(Error::Domain(format!(
            "coefficient of variation undefined: series {:?} has zero mean",
            s.name()
        )));
    }
    let sd = sample_variance(&x).sqrt();

    let (m2, m3, m4) = central_moments(&x, m);
    let (skewness, excess_kurtosis, raw_kurtosis) = if m2 > 0.0 {
        let raw = m4 / (m2 * m2);
        (Some(m3 / m2.powf(1.5)), Some(raw - 3.0), Some(raw))
    } else {
        (None, None, None)
    };

    let (hurst, hurst_flag) = if n < 20 {
        (None, Some("too_short".to_string()))
    } else if m2 == 0.0 {
        (None, Some("degenerate".to_string()))
    } else {
        match rescaled_range_hurst(&x) {
            Some(h) if h > 0.0 && h < 1.0 => (Some(h), None),
            Some(_) => (None, Some("out_of_range".to_string())),
            None => (None, Some("too_few_block_sizes".to_string())),
        }
    };

    Ok(DiagnosticsReport {
        n,
        min: sorted[0],
        q1: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        mean: m,
        q3: quantile_sorted(&sorted, 0.75),
        max: sorted[n - 1],
        sd,
        cov: 100.0 * sd / m,
        entropy: histogram_entropy(&sorted, bins),
        entropy_bins: bins,
        entropy_distinct: distinct_entropy(&sorted),
        skewness,
        excess_kurtosis,
        raw_kurtosis,
        hurst,
        hurst_flag,
    })
}

fn central_moments(x: &[f64], m: f64) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let (mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0);
    for v in x {
        let d = v - m;
        let d2 = d * d;
        s2 += d2;
        s3 += d2 * d;
        s4 += d2 * d2;
    }
    (s2 / n, s3 / n, s4 / n)
}

/// Shannon entropy in nats of the equal-width histogram over `[min, max]`.
pub(crate) fn histogram_entropy(sorted: &[f64], bins: usize) -> f64 {
    let lo = sorted[0];
    let hi = *sorted.last().unwrap();
    if hi == lo {
        return 0.0;
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for v in sorted {
        let b = (((v - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    plug_in_entropy(counts.into_iter(), sorted.len())
}

fn distinct_entropy(sorted: &[f64]) -> f64 {
    let mut counts = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().position(|v| *v != sorted[i]).map_or(sorted.len(), |p| i + p);
        counts.push(j - i);
        i = j;
    }
    plug_in_entropy(counts.into_iter(), sorted.len())
}

pub(crate) fn plug_in_entropy(counts: impl Iterator<Item = usize>, total: usize) -> f64 {
    let total = total as f64;
    -counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / total;
            p * p.ln()
        })
        .sum::<f64>()
}

/// Classical rescaled-range estimate: OLS slope of `ln(R/S)` on `ln(size)`
/// over dyadic block sizes `8, 16, …, ≤ n/2`.
fn rescaled_range_hurst(x: &[f64]) -> Option<f64> {
    let n = x.len();
    let mut pts: Vec<(f64, f64)> = Vec::new();
    let mut size = 8;
    while size <= n / 2 {
        let mut acc = 0.0;
        let mut used = 0usize;
        for block in x.chunks_exact(size) {
            let m = mean(block);
            let mut cum = 0.0;
            let (mut lo, mut hi) = (0.0_f64, 0.0_f64);
            let mut ss = 0.0;
            for v in block {
                cum += v - m;
                lo = lo.min(cum);
                hi = hi.max(cum);
                ss += (v - m) * (v - m);
            }
            let sd = (ss / size as f64).sqrt();
            if sd > 0.0 {
                acc += (hi - lo) / sd;
                used += 1;
            }
        }
        if used > 0 {
            pts.push(((size as f64).ln(), (acc / used as f64).ln()));
        }
        size *= 2;
    }
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}
