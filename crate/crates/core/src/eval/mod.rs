//! Forecast evaluation: accuracy metrics, Murphy diagrams and multiple
//! comparisons with the best.

mod mcb;
mod metrics;
mod murphy;

pub use mcb::{average_ranks, mcb, studentized_range_cdf, studentized_range_quantile, McbResult};
pub use metrics::{metrics, write_metrics_csv, MetricReport};
pub use murphy::{
    elementary_score, hac_variance_of_mean, murphy_difference, murphy_scores, theta_grid, MurphyCurve, MurphyDifference,
};
