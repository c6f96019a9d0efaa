// Enumerate the collapsed spike-and-slab posterior of a small regression and
// compare it with Gibbs sweeps over the inclusion indicators.

use bsts::spikeslab::{build_prior, gibbs_sweep_gamma, log_marginal_gamma, SpikeSlabConfig, SufficientStats};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn run_example() -> bsts::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (n, k) = (80, 3);
    let x = DMatrix::from_fn(n, k, |_, _| StandardNormal.sample(&mut rng));
    let y: Vec<f64> = (0..n)
        .map(|i| {
            let e: f64 = StandardNormal.sample(&mut rng);
            1.5 * x[(i, 0)] + 0.3 * x[(i, 2)] + e
        })
        .collect();
    let prior = build_prior(&x, &y, &SpikeSlabConfig::default())?;

    let mut logs = Vec::new();
    for mask in 0..1usize << k {
        let g: Vec<bool> = (0..k).map(|j| mask >> j & 1 == 1).collect();
        logs.push((g.clone(), log_marginal_gamma(&prior, &x, &y, &g)?));
    }
    let top = logs.iter().map(|(_, l)| *l).fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = logs.iter().map(|(_, l)| (l - top).exp()).sum();
    let mut exact = vec![0.0; k];
    for (g, l) in &logs {
        for j in 0..k {
            if g[j] {
                exact[j] += (l - top).exp() / z;
            }
        }
    }

    let stats = SufficientStats::new(&x, &y)?;
    let mut gamma = vec![false; k];
    let sweeps = 5000;
    let mut counts = vec![0usize; k];
    for _ in 0..sweeps {
        gibbs_sweep_gamma(&prior, &stats, &mut gamma, &mut rng)?;
        for j in 0..k {
            counts[j] += gamma[j] as usize;
        }
    }
    for j in 0..k {
        println!("x{j}: exact {:.3}  gibbs {:.3}", exact[j], counts[j] as f64 / sweeps as f64);
    }
    Ok(())
}

fn main() -> bsts::Result<()> {
    run_example()
}
