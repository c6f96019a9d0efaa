// Fit a structural model with spike-and-slab regression, then forecast.

use bsts::sampler::{fit, forecast, inclusion_probabilities, ComponentSpec, FitData, McmcConfig, ModelSpec};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn run_example() -> bsts::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let (n, h, k) = (120, 6, 4);
    let x = DMatrix::from_fn(n + h, k, |_, _| noise.sample(&mut rng));
    let mut level = 10.0;
    let y: Vec<f64> = (0..n + h)
        .map(|t| {
            level += 0.2 * noise.sample(&mut rng);
            level + 2.0 * x[(t, 1)] + 0.5 * noise.sample(&mut rng)
        })
        .collect();
    let names = (0..k).map(|j| format!("x{j}")).collect();
    let data = FitData::from_values(&y[..n], Some(x.rows(0, n).into_owned()), names);
    let spec = ModelSpec {
        components: vec![ComponentSpec::LocalLevel],
        ..Default::default()
    };
    let mcmc = McmcConfig {
        iterations: 600,
        burn_in: 200,
        seed: 5,
        chains: 2,
        ..Default::default()
    };
    let post = fit(&spec, &data, &mcmc)?;
    for inc in inclusion_probabilities(&post) {
        println!("{:>3} inclusion {:.2}", inc.name, inc.probability);
    }
    let future = x.rows(n, h).into_owned();
    let f = forecast(&post, Some(&future), h, 0.9, 5)?;
    for j in 0..h {
        println!(
            "step {} actual {:7.3} mean {:7.3} [{:7.3}, {:7.3}]",
            j + 1,
            y[n + j],
            f.mean[j],
            f.lower[j],
            f.upper[j]
        );
    }
    Ok(())
}

fn main() -> bsts::Result<()> {
    run_example()
}
