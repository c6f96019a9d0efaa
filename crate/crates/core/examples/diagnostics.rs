// Read a wide monthly CSV, transform a predictor, align and summarise.

use bsts::timeseries::{align, apply_transform, diagnostics, read_csv, Transform};

fn sample_csv() -> String {
    let mut s = String::from("date,target,price\n");
    for t in 0..60 {
        let target = 100.0 + 10.0 * ((t as f64) * 0.5).sin() + t as f64;
        let price = 50.0 * (1.0 + 0.004 * t as f64) + ((t * 7) % 5) as f64;
        s.push_str(&format!("{}-{:02},{target:.3},{price:.3}\n", 2015 + t / 12, t % 12 + 1));
    }
    s
}

pub fn run_example() -> bsts::Result<()> {
    let series = read_csv(sample_csv().as_bytes(), Some("date"))?;
    let target = &series[0];
    let inflation = apply_transform(&series[1], Transform::log_diff(0, 12)?)?;
    let aligned = align(target, std::slice::from_ref(&inflation))?;
    println!(
        "aligned {} rows from {} to {}",
        aligned.design.n(),
        aligned.design.dates()[0],
        aligned.design.dates().last().unwrap()
    );
    for s in [target, &inflation] {
        let d = diagnostics(s, None)?;
        println!(
            "{:<8} n={:3} mean={:9.4} sd={:8.4} cov={:8.2} entropy={:.3} skew={:?} hurst={:?}",
            s.name(),
            d.n,
            d.mean,
            d.sd,
            d.cov,
            d.entropy,
            d.skewness.map(|v| (v * 1e3).round() / 1e3),
            d.hurst.map(|v| (v * 1e3).round() / 1e3),
        );
    }
    Ok(())
}

fn main() -> bsts::Result<()> {
    run_example()
}
