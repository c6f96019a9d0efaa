use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{mean, quantile_sorted, sample_variance};

pub const MIN_WAVELET_LENGTH: usize = 64;

/// Smallest scale, in sampling intervals.
const S0: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WaveletConfig {
    /// Morlet centre frequency `ω₀`.
    pub omega0: f64,
    pub scales_per_octave: usize,
    /// Octaves above the smallest scale; `None` uses as many as leave an
    /// off-cone region.
    pub octaves: Option<usize>,
    pub alpha: f64,
    pub surrogates: usize,
    /// Significant share of the off-cone field needed for a positive decision.
    pub area_threshold: f64,
    /// Width of the boxcar smoother across scales, in octaves.
    pub scale_smoothing: f64,
}

impl Default for WaveletConfig {
    fn default() -> Self {
        Self {
            omega0: 6.0,
            scales_per_octave: 4,
            octaves: None,
            alpha: 0.05,
            surrogates: 100,
            area_threshold: 0.05,
            scale_smoothing: 0.6,
        }
    }
}

/// Squared wavelet coherence on a scale × time grid.
#[derive(Debug, Clone, Serialize)]
pub struct CoherenceField {
    pub scales: Vec<f64>,
    /// Equivalent Fourier period of each scale.
    pub periods: Vec<f64>,
    /// `r2[j][t]`
    pub r2: Vec<Vec<f64>>,
    /// Largest scale unaffected by edges at each time (e-folding `√2 s`).
    pub coi: Vec<f64>,
}

impl CoherenceField {
    pub fn off_cone(&self, j: usize, t: usize) -> bool {
        self.scales[j] <= self.coi[t]
    }

    pub fn n(&self) -> usize {
        self.coi.len()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WaveletResult {
    pub field: CoherenceField,
    /// Per-scale `1 − alpha` quantile of surrogate coherence.
    pub thresholds: Vec<f64>,
    /// Share of off-cone cells above their scale threshold.
    pub significant_area: f64,
    pub decision: bool,
}

fn fourier_factor(omega0: f64) -> f64 {
    4.0 * PI / (omega0 + (2.0 + omega0 * omega0).sqrt())
}

struct Grid {
    scales: Vec<f64>,
    pad: usize,
    omega: Vec<f64>,
}

fn grid(n: usize, cfg: &WaveletConfig) -> Result<Grid> {
    if n < MIN_WAVELET_LENGTH {
        return Err(Error::InsufficientData(format!("wavelet coherence needs {MIN_WAVELET_LENGTH} points, got {n}")));
    }
    if cfg.scales_per_octave == 0 || !(cfg.alpha > 0.0 && cfg.alpha < 1.0) || cfg.omega0 <= 0.0 {
        return Err(Error::Config("wavelet settings need scales_per_octave ≥ 1, alpha in (0, 1), ω₀ > 0".into()));
    }
    // the largest scale must fit off-cone somewhere: √2 s ≤ n/2
    let allowed = ((n as f64 / (2.0 * 2f64.sqrt()) / S0).log2()).floor() as usize;
    let octaves = cfg.octaves.unwrap_or(allowed);
    if octaves == 0 || octaves > allowed {
        return Err(Error::InsufficientData(format!("{n} points support at most {allowed} octaves, requested {octaves}")));
    }
    let j_max = octaves * cfg.scales_per_octave;
    let scales = (0..=j_max).map(|j| S0 * 2f64.powf(j as f64 / cfg.scales_per_octave as f64)).collect();
    let pad = 2 * n.next_power_of_two();
    let omega = (0..pad)
        .map(|k| {
            let k = if k <= pad / 2 { k as f64 } else { k as f64 - pad as f64 };
            2.0 * PI * k / pad as f64
        })
        .collect();
    Ok(Grid { scales, pad, omega })
}

/// Morlet continuous wavelet transform of the standardised series, one row per scale.
fn cwt(x: &[f64], g: &Grid, omega0: f64, planner: &mut FftPlanner<f64>) -> Vec<Vec<Complex64>> {
    let n = x.len();
    let m = mean(x);
    let sd = sample_variance(x).sqrt();
    let mut buf: Vec<Complex64> = (0..g.pad)
        .map(|t| Complex64::new(if t < n { (x[t] - m) / sd } else { 0.0 }, 0.0))
        .collect();
    let fwd = planner.plan_fft_forward(g.pad);
    let inv = planner.plan_fft_inverse(g.pad);
    fwd.process(&mut buf);
    let norm = PI.powf(-0.25);
    g.scales
        .iter()
        .map(|&s| {
            let mut w: Vec<Complex64> = buf
                .iter()
                .zip(&g.omega)
                .map(|(v, &om)| {
                    if om > 0.0 {
                        v * ((2.0 * PI * s).sqrt() * norm * (-(s * om - omega0).powi(2) / 2.0).exp())
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect();
            inv.process(&mut w);
            w.truncate(n);
            w.iter().map(|v| v / g.pad as f64).collect()
        })
        .collect()
}

/// Gaussian smoothing in time (standard deviation `s`) then a boxcar over
/// scale of width `width` scale steps.
fn smooth(field: &[Vec<Complex64>], g: &Grid, width: f64, planner: &mut FftPlanner<f64>) -> Vec<Vec<Complex64>> {
    let n = field[0].len();
    let fwd = planner.plan_fft_forward(g.pad);
    let inv = planner.plan_fft_inverse(g.pad);
    let timed: Vec<Vec<Complex64>> = field
        .iter()
        .zip(&g.scales)
        .map(|(row, &s)| {
            let mut buf: Vec<Complex64> = (0..g.pad).map(|t| if t < n { row[t] } else { Complex64::new(0.0, 0.0) }).collect();
            fwd.process(&mut buf);
            for (v, om) in buf.iter_mut().zip(&g.omega) {
                *v *= (-(s * om).powi(2) / 2.0).exp();
            }
            inv.process(&mut buf);
            buf.truncate(n);
            buf.iter().map(|v| v / g.pad as f64).collect()
        })
        .collect();
    // weight of neighbour d = overlap of [d − ½, d + ½] with [−width/2, width/2]
    let half = width / 2.0;
    let reach = (half + 0.5).floor() as i64;
    let weights: Vec<(i64, f64)> = (-reach..=reach)
        .map(|d| {
            let lo = (d as f64 - 0.5).max(-half);
            let hi = (d as f64 + 0.5).min(half);
            (d, (hi - lo).max(0.0))
        })
        .filter(|(_, w)| *w > 0.0)
        .collect();
    let js = timed.len() as i64;
    (0..js)
        .map(|j| {
            let mut acc = vec![Complex64::new(0.0, 0.0); n];
            let mut total = 0.0;
            for &(d, w) in &weights {
                let k = j + d;
                if (0..js).contains(&k) {
                    total += w;
                    for (a, v) in acc.iter_mut().zip(&timed[k as usize]) {
                        *a += v * w;
                    }
                }
            }
            acc.iter().map(|a| a / total).collect()
        })
        .collect()
}

fn coherence_on(x: &[f64], y: &[f64], g: &Grid, cfg: &WaveletConfig, planner: &mut FftPlanner<f64>) -> Vec<Vec<f64>> {
    let wx = cwt(x, g, cfg.omega0, planner);
    let wy = cwt(y, g, cfg.omega0, planner);
    let width = cfg.scale_smoothing * cfg.scales_per_octave as f64;
    let scaled = |f: &dyn Fn(usize, usize) -> Complex64| -> Vec<Vec<Complex64>> {
        (0..g.scales.len()).map(|j| (0..x.len()).map(|t| f(j, t) / g.scales[j]).collect()).collect()
    };
    let sxy = smooth(&scaled(&|j, t| wx[j][t] * wy[j][t].conj()), g, width, planner);
    let sxx = smooth(&scaled(&|j, t| Complex64::new(wx[j][t].norm_sqr(), 0.0)), g, width, planner);
    let syy = smooth(&scaled(&|j, t| Complex64::new(wy[j][t].norm_sqr(), 0.0)), g, width, planner);
    (0..g.scales.len())
        .map(|j| {
            (0..x.len())
                .map(|t| {
                    let den = sxx[j][t].re * syy[j][t].re;
                    if den > 0.0 {
                        (sxy[j][t].norm_sqr() / den).clamp(0.0, 1.0)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

/// Squared wavelet coherence of `x` and `y` (Morlet mother).
pub fn coherence(x: &[f64], y: &[f64], cfg: &WaveletConfig) -> Result<CoherenceField> {
    check(x, y)?;
    let n = x.len();
    let g = grid(n, cfg)?;
    let mut planner = FftPlanner::new();
    let r2 = coherence_on(x, y, &g, cfg, &mut planner);
    let ff = fourier_factor(cfg.omega0);
    Ok(CoherenceField {
        periods: g.scales.iter().map(|s| s * ff).collect(),
        coi: (0..n).map(|t| (t + 1).min(n - t) as f64 / 2f64.sqrt()).collect(),
        scales: g.scales,
        r2,
    })
}

fn check(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Alignment(format!("series lengths differ: {} vs {}", x.len(), y.len())));
    }
    for s in [x, y] {
        if s.len() >= 2 && sample_variance(s) == 0.0 {
            return Err(Error::Domain("wavelet coherence of a constant series".into()));
        }
    }
    Ok(())
}

fn lag1_autocorrelation(x: &[f64]) -> f64 {
    let m = mean(x);
    let den: f64 = x.iter().map(|v| (v - m).powi(2)).sum();
    let num: f64 = x.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
    (num / den).clamp(-0.99, 0.99)
}

fn red_noise<R: Rng + ?Sized>(phi: f64, n: usize, rng: &mut R) -> Vec<f64> {
    let innov = (1.0 - phi * phi).sqrt();
    let mut v: f64 = rng.sample(StandardNormal);
    (0..n)
        .map(|_| {
            let out = v;
            v = phi * v + innov * rng.sample::<f64, _>(StandardNormal);
            out
        })
        .collect()
}

/// Coherence with per-scale significance thresholds from pairs of AR(1)
/// surrogates matched to each series' lag-1 autocorrelation.
pub fn wavelet_coherence<R: Rng + ?Sized>(x: &[f64], y: &[f64], cfg: &WaveletConfig, rng: &mut R) -> Result<WaveletResult> {
    let field = coherence(x, y, cfg)?;
    let n = x.len();
    let g = grid(n, cfg)?;
    let mut planner = FftPlanner::new();
    let (px, py) = (lag1_autocorrelation(x), lag1_autocorrelation(y));
    let js = field.scales.len();
    let mut pooled: Vec<Vec<f64>> = vec![Vec::new(); js];
    for _ in 0..cfg.surrogates {
        let sx = red_noise(px, n, rng);
        let sy = red_noise(py, n, rng);
        let r2 = coherence_on(&sx, &sy, &g, cfg, &mut planner);
        for (j, row) in r2.iter().enumerate() {
            pooled[j].extend((0..n).filter(|&t| field.off_cone(j, t)).map(|t| row[t]));
        }
    }
    let thresholds: Vec<f64> = pooled
        .iter_mut()
        .map(|v| {
            if v.is_empty() {
                f64::INFINITY
            } else {
                v.sort_by(f64::total_cmp);
                quantile_sorted(v, 1.0 - cfg.alpha)
            }
        })
        .collect();
    let (mut total, mut hits) = (0usize, 0usize);
    for j in 0..js {
        for t in 0..n {
            if field.off_cone(j, t) {
                total += 1;
                if field.r2[j][t] > thresholds[j] {
                    hits += 1;
                }
            }
        }
    }
    let significant_area = if total == 0 { 0.0 } else { hits as f64 / total as f64 };
    Ok(WaveletResult {
        field,
        thresholds,
        significant_area,
        decision: significant_area > cfg.area_threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    #[test]
    fn self_coherence_is_one() {
        let x = noise(256, 1);
        let f = coherence(&x, &x, &WaveletConfig::default()).unwrap();
        for j in 0..f.scales.len() {
            for t in 0..f.n() {
                assert!(f.r2[j][t] >= 0.99, "{j} {t}");
            }
        }
    }

    #[test]
    fn coherence_is_bounded() {
        let f = coherence(&noise(200, 2), &noise(200, 3), &WaveletConfig::default()).unwrap();
        assert!(f.r2.iter().flatten().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn shared_cycle_shows_up_at_its_period() {
        let n = 512;
        let e1 = noise(n, 4);
        let e2 = noise(n, 5);
        let x: Vec<f64> = (0..n).map(|t| (2.0 * PI * t as f64 / 32.0).sin() + 0.5 * e1[t]).collect();
        let y: Vec<f64> = (0..n).map(|t| (2.0 * PI * t as f64 / 32.0).sin() + 0.5 * e2[t]).collect();
        let f = coherence(&x, &y, &WaveletConfig::default()).unwrap();
        let band: Vec<f64> = (0..f.scales.len())
            .map(|j| {
                let v: Vec<f64> = (0..n).filter(|&t| f.off_cone(j, t)).map(|t| f.r2[j][t]).collect();
                v.iter().sum::<f64>() / v.len().max(1) as f64
            })
            .collect();
        let best = band.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert!((25.0..=40.0).contains(&f.periods[best]), "{}", f.periods[best]);
        assert!(band[best] > 0.9);
    }

    #[test]
    fn independent_noise_rarely_significant() {
        let cfg = WaveletConfig {
            surrogates: 30,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let small = (0..20)
            .filter(|s| {
                let r = wavelet_coherence(&noise(128, 100 + s), &noise(128, 200 + s), &cfg, &mut rng).unwrap();
                r.significant_area <= 0.10
            })
            .count();
        assert!(small >= 18, "{small}");
    }

    #[test]
    fn too_short_or_too_many_octaves() {
        let x = noise(40, 7);
        assert!(coherence(&x, &x, &WaveletConfig::default()).is_err());
        let x = noise(64, 7);
        let cfg = WaveletConfig {
            octaves: Some(6),
            ..Default::default()
        };
        assert!(matches!(coherence(&x, &x, &cfg), Err(Error::InsufficientData(_))));
    }
}
