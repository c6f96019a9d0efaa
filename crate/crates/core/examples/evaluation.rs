// Accuracy metrics, a Murphy diagram comparison and multiple comparisons
// with the best over several horizons.

use bsts::eval::{mcb, metrics, murphy_difference, murphy_scores, theta_grid};
use nalgebra::DMatrix;

pub fn run_example() -> bsts::Result<()> {
    let train = [98.0, 103.0, 101.0, 107.0, 110.0, 108.0];
    let actual = [112.0, 109.0, 115.0, 118.0];
    let models = vec![
        ("naive".to_string(), vec![108.0; 4]),
        ("trend".to_string(), vec![111.0, 113.0, 115.0, 117.0]),
    ];
    for (name, f) in &models {
        let m = metrics(&actual, f, &train)?;
        println!(
            "{name:<6} RMSE {:.3} MAE {:.3} MAPE {:.3} SMAPE {:.3} MASE {:?}",
            m.rmse, m.mae, m.mape.unwrap_or(f64::NAN), m.smape, m.mase
        );
    }

    let pooled: Vec<f64> = actual.iter().chain(models.iter().flat_map(|(_, f)| f)).copied().collect();
    let grid = theta_grid(&pooled, 101, 0.01)?;
    let curve = murphy_scores(&actual, &models, &grid)?;
    let d = murphy_difference(&actual, &models[1].1, &models[0].1, &grid)?;
    let peak = (0..grid.len()).max_by(|&a, &b| curve.scores[0][a].total_cmp(&curve.scores[0][b])).unwrap();
    println!(
        "naive peaks at θ={:.2}; trend − naive there {:.3} [{:.3}, {:.3}]",
        grid[peak], d.diff[peak], d.lower[peak], d.upper[peak]
    );

    let names: Vec<String> = ["A", "B", "C", "D"].iter().map(|s| s.to_string()).collect();
    let errors = DMatrix::from_row_slice(5, 4, &[
        1.0, 2.0, 3.0, 4.0, //
        1.5, 1.0, 3.5, 4.0, //
        0.9, 2.5, 2.0, 5.0, //
        1.1, 1.9, 2.9, 3.9, //
        1.0, 1.2, 4.0, 3.0,
    ]);
    let r = mcb(&errors, &names, 0.05)?;
    println!("MCB half-width {:.3} (q = {:.4})", r.half_width, r.q);
    for ((name, rank), worse) in names.iter().zip(&r.mean_ranks).zip(&r.worse_than_best) {
        println!("{name} mean rank {rank:.2}{}", if *worse { "  worse than best" } else { "" });
    }
    Ok(())
}

fn main() -> bsts::Result<()> {
    run_example()
}
