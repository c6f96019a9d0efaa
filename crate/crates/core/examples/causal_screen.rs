// Screen candidate predictors with four pairwise tests and a retention rule.

use bsts::screen::{screen_all, RetentionRule, ScreenConfig};
use bsts::timeseries::{align, TimeSeries, YearMonth};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn run_example() -> bsts::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let n = 160;
    let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
    let driver: Vec<f64> = (0..n).map(|_| draw()).collect();
    let unrelated: Vec<f64> = (0..n).map(|_| draw()).collect();
    let mut target = vec![0.0; n];
    for t in 1..n {
        target[t] = 0.3 * target[t - 1] + 0.9 * driver[t - 1] + 0.5 * draw();
    }
    let start = YearMonth::new(2008, 1)?;
    let a = align(
        &TimeSeries::from_values("target", start, &target)?,
        &[
            TimeSeries::from_values("driver", start, &driver)?,
            TimeSeries::from_values("unrelated", start, &unrelated)?,
        ],
    )?;
    let mut cfg = ScreenConfig {
        rule: RetentionRule::Majority,
        seed: 4,
        ..Default::default()
    };
    cfg.te.shuffles = 100;
    cfg.wavelet.surrogates = 30;
    let report = screen_all(&a.design, &cfg);
    let mut out = Vec::new();
    report.write_csv(&mut out)?;
    print!("{}", String::from_utf8_lossy(&out));
    println!("retained: {:?}", report.retained());
    Ok(())
}

fn main() -> bsts::Result<()> {
    run_example()
}
