use std::io::Write;

use serde::Serialize;

use super::{Draw, McmcConfig, PosteriorDraws};
use crate::error::{Error, Result};
use crate::linalg::{quantile_sorted, sorted_copy};
use crate::statespace::Component;

pub const SCHEMA_VERSION: &str = "1.0";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Inclusion {
    pub name: String,
    pub index: usize,
    pub probability: f64,
    /// Mean coefficient over draws that include the predictor.
    pub mean_beta_if_included: Option<f64>,
}

/// Fraction of retained draws including each predictor, sorted by decreasing
/// probability (ties keep column order).
pub fn inclusion_probabilities(post: &PosteriorDraws) -> Vec<Inclusion> {
    let nd = post.len().max(1) as f64;
    let mut out: Vec<Inclusion> = post
        .predictor_names
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let included: Vec<&Draw> = post.draws.iter().filter(|d| d.gamma[k]).collect();
            let mean_beta = (!included.is_empty())
                .then(|| included.iter().map(|d| d.beta[k]).sum::<f64>() / included.len() as f64);
            Inclusion {
                name: name.clone(),
                index: k,
                probability: included.len() as f64 / nd,
                mean_beta_if_included: mean_beta,
            }
        })
        .collect();
    out.sort_by(|a, b| b.probability.total_cmp(&a.probability));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub q025: f64,
    pub median: f64,
    pub q975: f64,
}

impl ParameterSummary {
    fn new(name: String, values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        let s = sorted_copy(values);
        Self {
            name,
            mean,
            sd: var.sqrt(),
            q025: quantile_sorted(&s, 0.025),
            median: quantile_sorted(&s, 0.5),
            q975: quantile_sorted(&s, 0.975),
        }
    }
}

fn component_parameters(c: &Component) -> Vec<(String, f64)> {
    let name = c.name();
    match c {
        Component::LocalLevel { sigma2 } | Component::Seasonal { sigma2, .. } => vec![(format!("{name}.sigma2"), *sigma2)],
        Component::LocalLinearTrend {
            level_sigma2,
            slope_sigma2,
        } => vec![
            (format!("{name}.level_sigma2"), *level_sigma2),
            (format!("{name}.slope_sigma2"), *slope_sigma2),
        ],
        Component::Ar { coefficients, sigma2 } => coefficients
            .iter()
            .enumerate()
            .map(|(i, p)| (format!("{name}.phi{}", i + 1), *p))
            .chain(std::iter::once((format!("{name}.sigma2"), *sigma2)))
            .collect(),
    }
}

/// Named scalar parameters of one draw: component parameters, then `obs.sigma2`.
pub fn draw_parameters(d: &Draw) -> Vec<(String, f64)> {
    let mut out: Vec<(String, f64)> = d.components.iter().flat_map(component_parameters).collect();
    out.push(("obs.sigma2".into(), d.sigma2));
    out
}

/// Serializable digest of a fit.
#[derive(Debug, Clone, Serialize)]
pub struct FitSummary {
    pub schema_version: &'static str,
    pub mcmc: McmcConfig,
    pub n_observations: usize,
    pub n_draws: usize,
    pub components: Vec<String>,
    pub parameters: Vec<ParameterSummary>,
    pub inclusion: Vec<Inclusion>,
    pub mean_log_likelihood: Vec<f64>,
}

impl FitSummary {
    pub fn new(post: &PosteriorDraws) -> Result<Self> {
        let first = post.draws.first().ok_or_else(|| Error::InsufficientData("no posterior draws".into()))?;
        let names: Vec<String> = draw_parameters(first).into_iter().map(|(n, _)| n).collect();
        let mut columns = vec![Vec::with_capacity(post.len()); names.len()];
        for d in &post.draws {
            for (i, (_, v)) in draw_parameters(d).into_iter().enumerate() {
                columns[i].push(v);
            }
        }
        let retained = post.config.burn_in;
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            mcmc: post.config.clone(),
            n_observations: post.n,
            n_draws: post.len(),
            components: first.components.iter().map(Component::name).collect(),
            parameters: names.into_iter().zip(&columns).map(|(n, c)| ParameterSummary::new(n, c)).collect(),
            inclusion: inclusion_probabilities(post),
            mean_log_likelihood: post
                .log_likelihood_trace
                .iter()
                .map(|t| {
                    let kept = &t[retained.min(t.len())..];
                    kept.iter().sum::<f64>() / kept.len().max(1) as f64
                })
                .collect(),
        })
    }
}

/// Writes one row per retained draw: chain, iteration, log-likelihood, the
/// scalar parameters and every coefficient.
pub fn write_draws_csv<W: Write>(post: &PosteriorDraws, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let Some(first) = post.draws.first() else {
        return Ok(());
    };
    let mut header = vec!["chain".to_string(), "iteration".into(), "log_likelihood".into()];
    header.extend(draw_parameters(first).into_iter().map(|(n, _)| n));
    header.extend(post.predictor_names.iter().map(|n| format!("beta.{n}")));
    let io = |e: csv::Error| Error::Io {
        path: "<draws>".into(),
        source: std::io::Error::other(e),
    };
    w.write_record(&header).map_err(io)?;
    for d in &post.draws {
        let mut row = vec![d.chain.to_string(), d.iteration.to_string(), d.log_likelihood.to_string()];
        row.extend(draw_parameters(d).into_iter().map(|(_, v)| v.to_string()));
        row.extend(d.beta.iter().map(f64::to_string));
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Io {
        path: "<draws>".into(),
        source: e,
    })
}
