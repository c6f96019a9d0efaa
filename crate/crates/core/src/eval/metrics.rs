use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

/// Point-forecast accuracy over one horizon. Percentages are on a 0–100 scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub horizon: usize,
    pub rmse: f64,
    pub mae: f64,
    /// `None` when an actual value is zero.
    pub mape: Option<f64>,
    pub smape: f64,
    /// `None` for single-step horizons or a constant training series.
    pub mase: Option<f64>,
    pub notes: Vec<String>,
}

impl MetricReport {
    /// `(name, value)` pairs in reporting order.
    pub fn entries(&self) -> [(&'static str, Option<f64>); 5] {
        [
            ("MAPE", self.mape),
            ("SMAPE", Some(self.smape)),
            ("MAE", Some(self.mae)),
            ("MASE", self.mase),
            ("RMSE", Some(self.rmse)),
        ]
    }
}

/// RMSE, MAE, MAPE, SMAPE and MASE of `forecast` against `actual`.
///
/// MASE scales the summed absolute error by `(h/(T−1)) Σ|y_t − y_{t−1}|` over
/// the training series, and is reported as undefined when `h = 1`.
pub fn metrics(actual: &[f64], forecast: &[f64], train: &[f64]) -> Result<MetricReport> {
    let h = actual.len();
    if forecast.len() != h {
        return Err(Error::Dimension(format!("{h} actual values but {} forecasts", forecast.len())));
    }
    if h == 0 {
        return Err(Error::InsufficientData("empty forecast window".into()));
    }
    if actual.iter().chain(forecast).chain(train).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            index: 0,
            message: "metric input".into(),
        });
    }
    let hf = h as f64;
    let err: Vec<f64> = actual.iter().zip(forecast).map(|(y, f)| f - y).collect();
    let mae = err.iter().map(|e| e.abs()).sum::<f64>() / hf;
    let rmse = (err.iter().map(|e| e * e).sum::<f64>() / hf).sqrt();
    let mut notes = Vec::new();
    let mape = if actual.contains(&0.0) {
        notes.push("MAPE undefined: zero actual value".to_string());
        None
    } else {
        Some(100.0 * err.iter().zip(actual).map(|(e, y)| e.abs() / y.abs()).sum::<f64>() / hf)
    };
    let smape = 100.0
        * err
            .iter()
            .zip(actual.iter().zip(forecast))
            .map(|(e, (y, f))| {
                let den = (y.abs() + f.abs()) / 2.0;
                if den == 0.0 {
                    0.0
                } else {
                    e.abs() / den
                }
            })
            .sum::<f64>()
        / hf;
    let naive: f64 = train.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    let mase = if h == 1 {
        notes.push("MASE undefined for a single-step horizon".to_string());
        None
    } else if train.len() < 2 || naive == 0.0 {
        notes.push("MASE undefined: constant or too-short training series".to_string());
        None
    } else {
        let scale = hf / (train.len() - 1) as f64 * naive;
        Some(err.iter().map(|e| e.abs()).sum::<f64>() / scale)
    };
    Ok(MetricReport {
        horizon: h,
        rmse,
        mae,
        mape,
        smape,
        mase,
        notes,
    })
}

/// Long-format table `horizon,metric,model,value`; undefined values are `NA`.
pub fn write_metrics_csv<W: Write>(rows: &[(String, MetricReport)], writer: W) -> Result<()> {
    let io = |e: csv::Error| Error::Io {
        path: "<metrics>".into(),
        source: std::io::Error::other(e),
    };
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["horizon", "metric", "model", "value"]).map_err(io)?;
    for (model, r) in rows {
        for (metric, v) in r.entries() {
            let v = v.map_or_else(|| "NA".to_string(), |v| v.to_string());
            w.write_record([r.horizon.to_string().as_str(), metric, model, &v]).map_err(io)?;
        }
    }
    w.flush().map_err(|source| Error::Io {
        path: "<metrics>".into(),
        source,
    })
}
