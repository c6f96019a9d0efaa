// Impulse response of a persistent series to a one-SD shock, by local projections.

use bsts::lp::{lp_irf, LpConfig, Trend};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn run_example() -> bsts::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 300;
    let shock: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut y = vec![0.0; n];
    for t in 1..n {
        let e: f64 = StandardNormal.sample(&mut rng);
        y[t] = 0.7 * y[t - 1] + 1.0 * shock[t] + 0.5 * e;
    }
    let cfg = LpConfig {
        horizons: 8,
        trend: Trend::Linear,
        ..Default::default()
    };
    let irf = lp_irf(&y, &shock, &[], ("shock", "y"), &[], &cfg)?;
    println!("lags {} (BIC), n = {}, shock sd {:.3}", irf.lags, irf.n_obs, irf.shock_sd);
    for p in &irf.points {
        let theory = irf.shock_sd * 0.7f64.powi(p.h as i32);
        println!("h={:2} {:7.3} [{:7.3}, {:7.3}]  theory {:.3}", p.h, p.point, p.lower, p.upper, theory);
    }
    Ok(())
}

fn main() -> bsts::Result<()> {
    run_example()
}
