mod common;

use bsts::spikeslab::{
    build_prior, draw_beta_sigma_from_stats, gibbs_sweep_gamma, log_marginal_gamma, posterior_quantities,
    SpikeSlabConfig, SufficientStats,
};
use nalgebra::DMatrix;

fn design(seed: u64) -> (DMatrix<f64>, Vec<f64>) {
    let mut rng = common::rng(seed);
    let (n, k) = (20, 3);
    let z = common::normals(&mut rng, n * k + n);
    let x = DMatrix::from_fn(n, k, |i, j| z[i * k + j] + if j == 2 { 0.6 * z[i * k] } else { 0.0 });
    let y = (0..n).map(|i| 0.9 * x[(i, 0)] + 0.8 * z[n * k + i]).collect();
    (x, y)
}

fn all_gammas(k: usize) -> Vec<Vec<bool>> {
    (0..1usize << k).map(|m| (0..k).map(|j| m >> j & 1 == 1).collect()).collect()
}

fn normalise(lp: &[f64]) -> Vec<f64> {
    let mx = lp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = lp.iter().map(|v| (v - mx).exp()).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|v| v / s).collect()
}

#[test]
fn enumerated_posterior_matches_multivariate_t() {
    for seed in 0..5 {
        let (x, y) = design(seed);
        let prior = build_prior(&x, &y, &SpikeSlabConfig { expected_size: Some(1.2), ..Default::default() }).unwrap();
        let gs = all_gammas(3);
        let ours: Vec<f64> = gs.iter().map(|g| log_marginal_gamma(&prior, &x, &y, g).unwrap()).collect();
        let oracle: Vec<f64> = gs
            .iter()
            .map(|g| common::dense_log_marginal(&x, &y, &prior.omega_inv, &prior.pi, prior.nu, prior.ss, g))
            .collect();
        for (a, b) in normalise(&ours).iter().zip(normalise(&oracle)) {
            assert!((a - b).abs() < 1e-10, "seed {seed}: {a} vs {b}");
        }
    }
}

#[test]
fn beta_tilde_matches_gaussian_conditioning() {
    let (x, y) = design(9);
    let prior = build_prior(&x, &y, &SpikeSlabConfig::default()).unwrap();
    for g in all_gammas(3).into_iter().skip(1) {
        let pq = posterior_quantities(&prior, &x, &y, &g).unwrap();
        let oracle = common::dense_beta_mean(&x, &y, &prior.omega_inv, &pq.included);
        assert!((&pq.beta_tilde - oracle).amax() < 1e-10);
    }
}

#[test]
fn gibbs_frequencies_match_enumeration() {
    let (x, y) = design(3);
    let prior = build_prior(&x, &y, &SpikeSlabConfig { expected_size: Some(1.5), ..Default::default() }).unwrap();
    let gs = all_gammas(3);
    let exact = normalise(&gs.iter().map(|g| log_marginal_gamma(&prior, &x, &y, g).unwrap()).collect::<Vec<_>>());
    let stats = SufficientStats::new(&x, &y).unwrap();
    let mut rng = common::rng(42);
    let mut g = vec![false; 3];
    let mut counts = [0usize; 8];
    let sweeps = 40_000;
    for _ in 0..sweeps {
        gibbs_sweep_gamma(&prior, &stats, &mut g, &mut rng).unwrap();
        counts[g.iter().enumerate().map(|(j, &b)| (b as usize) << j).sum::<usize>()] += 1;
    }
    for (c, p) in counts.iter().zip(&exact) {
        let f = *c as f64 / sweeps as f64;
        assert!((f - p).abs() < 0.015 + 0.1 * p, "{f} vs {p}");
    }
}

#[test]
fn sigma_and_beta_draw_moments() {
    let (x, y) = design(5);
    let prior = build_prior(&x, &y, &SpikeSlabConfig::default()).unwrap();
    let stats = SufficientStats::new(&x, &y).unwrap();
    let g = [true, false, true];
    let pq = posterior_quantities(&prior, &x, &y, &g).unwrap();
    let mut rng = common::rng(8);
    let draws = 40_000;
    let (mut sp, mut b0) = (0.0, 0.0);
    for _ in 0..draws {
        let (beta, s2) = draw_beta_sigma_from_stats(&prior, &stats, &g, &mut rng).unwrap();
        sp += 1.0 / s2;
        b0 += beta[0];
    }
    let mean_prec = pq.n_post / pq.ss_post;
    assert!((sp / draws as f64 / mean_prec - 1.0).abs() < 0.01);
    let sd0 = (pq.ss_post / (pq.n_post - 2.0) * pq.v_inv.clone().try_inverse().unwrap()[(0, 0)]).sqrt();
    assert!((b0 / draws as f64 - pq.beta_tilde[0]).abs() < 4.0 * sd0 / (draws as f64).sqrt());
}
