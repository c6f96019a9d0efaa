// Filter and smooth a trend-plus-seasonal series with a gap.

use bsts::statespace::{assemble, kalman_filter, kalman_smoother, Component};

pub fn run_example() -> bsts::Result<()> {
    let model = assemble(&[Component::local_linear_trend(0.05, 0.001), Component::seasonal(4, 0.01)], 0)?.with_obs_variance(0.25);
    let y: Vec<Option<f64>> = (0..40)
        .map(|t| {
            let season = [1.0, -0.5, 0.3, -0.8][t % 4];
            let noise = ((t * 37 % 11) as f64 - 5.0) * 0.08;
            (t != 17 && t != 18).then_some(0.2 * t as f64 + season + noise)
        })
        .collect();
    let filter = kalman_filter(&model, &y)?;
    let smooth = kalman_smoother(&model, &filter)?;
    println!("log-likelihood {:.4}", filter.log_likelihood);
    for t in [0, 16, 17, 18, 19, 39] {
        let level = smooth.mean[t][0];
        let sd = smooth.cov[t][(0, 0)].sqrt();
        let obs = y[t].map_or("  missing".to_string(), |v| format!("{v:9.4}"));
        println!("t={t:2} y={obs} level={level:8.4} ± {sd:.4}");
    }
    Ok(())
}

fn main() -> bsts::Result<()> {
    run_example()
}
