use serde::Serialize;

use crate::error::{Error, Result};

/// Elementary score of one forecast: `|y − θ|` when
/// `min(ŷ, y) ≤ θ < max(ŷ, y)`, else 0.
pub fn elementary_score(forecast: f64, actual: f64, theta: f64) -> f64 {
    let (lo, hi) = if forecast < actual { (forecast, actual) } else { (actual, forecast) };
    if lo <= theta && theta < hi {
        (actual - theta).abs()
    } else {
        0.0
    }
}

/// `points` equally spaced thresholds spanning the pooled range of `values`,
/// padded by `pad` of the range on each side.
pub fn theta_grid(values: &[f64], points: usize, pad: f64) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::Config("a threshold grid needs at least two points".into()));
    }
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::InsufficientData("no finite values for the threshold grid".into()));
    }
    let span = (hi - lo).max(f64::EPSILON * hi.abs().max(1.0));
    let (a, b) = (lo - pad * span, hi + pad * span);
    Ok((0..points).map(|i| a + (b - a) * i as f64 / (points - 1) as f64).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MurphyCurve {
    pub theta: Vec<f64>,
    pub models: Vec<String>,
    /// `scores[j][i]` is model `j`'s mean score at `theta[i]`.
    pub scores: Vec<Vec<f64>>,
}

fn check(actual: &[f64], forecast: &[f64], theta: &[f64]) -> Result<()> {
    if actual.len() != forecast.len() {
        return Err(Error::Dimension(format!("{} actual values but {} forecasts", actual.len(), forecast.len())));
    }
    if actual.is_empty() || theta.is_empty() {
        return Err(Error::InsufficientData("empty sample or threshold grid".into()));
    }
    if theta.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("threshold grid must be strictly ascending".into()));
    }
    Ok(())
}

/// Mean elementary scores `S_j(θ)` of each model over the grid.
pub fn murphy_scores(actual: &[f64], forecasts: &[(String, Vec<f64>)], theta: &[f64]) -> Result<MurphyCurve> {
    let mut scores = Vec::with_capacity(forecasts.len());
    for (_, f) in forecasts {
        check(actual, f, theta)?;
        let n = actual.len() as f64;
        scores.push(
            theta
                .iter()
                .map(|&th| f.iter().zip(actual).map(|(f, y)| elementary_score(*f, *y, th)).sum::<f64>() / n)
                .collect(),
        );
    }
    Ok(MurphyCurve {
        theta: theta.to_vec(),
        models: forecasts.iter().map(|(n, _)| n.clone()).collect(),
        scores,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MurphyDifference {
    pub theta: Vec<f64>,
    /// `S_a(θ) − S_b(θ)`; negative favours model a.
    pub diff: Vec<f64>,
    pub se: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub truncation: usize,
}

/// Bartlett-weighted long-run variance of the mean of `d`.
pub fn hac_variance_of_mean(d: &[f64], truncation: usize) -> f64 {
    let n = d.len();
    let m = d.iter().sum::<f64>() / n as f64;
    let gamma = |l: usize| (l..n).map(|t| (d[t] - m) * (d[t - l] - m)).sum::<f64>() / n as f64;
    let mut lrv = gamma(0);
    for l in 1..=truncation.min(n.saturating_sub(1)) {
        lrv += 2.0 * (1.0 - l as f64 / (truncation as f64 + 1.0)) * gamma(l);
    }
    (lrv / n as f64).max(0.0)
}

/// Score difference between two forecasters with 95% bands from a HAC
/// standard error (Bartlett, truncation `⌈h^{1/3}⌉`).
pub fn murphy_difference(actual: &[f64], a: &[f64], b: &[f64], theta: &[f64]) -> Result<MurphyDifference> {
    check(actual, a, theta)?;
    check(actual, b, theta)?;
    let h = actual.len();
    let truncation = (h as f64).cbrt().ceil() as usize;
    let mut out = MurphyDifference {
        theta: theta.to_vec(),
        diff: Vec::with_capacity(theta.len()),
        se: Vec::with_capacity(theta.len()),
        lower: Vec::with_capacity(theta.len()),
        upper: Vec::with_capacity(theta.len()),
        truncation,
    };
    for &th in theta {
        let d: Vec<f64> = (0..h)
            .map(|t| elementary_score(a[t], actual[t], th) - elementary_score(b[t], actual[t], th))
            .collect();
        let mean = d.iter().sum::<f64>() / h as f64;
        let se = hac_variance_of_mean(&d, truncation).sqrt();
        out.diff.push(mean);
        out.se.push(se);
        out.lower.push(mean - 1.96 * se);
        out.upper.push(mean + 1.96 * se);
    }
    Ok(out)
}
