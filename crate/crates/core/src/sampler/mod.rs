//! Gibbs sampling for structural time-series models with spike-and-slab
//! regression.
//!
//! Each iteration
//!
//! 1. draws the state path given the parameters and the regression offset,
//! 2. redraws the component parameters given the states,
//! 3. forms `y*_t = y_t − Zᵀα_t`, sweeps the inclusion indicators and draws
//!    `(β, σ²)`.
//!
//! Chains run in parallel, each from its own ChaCha stream.

mod forecast;
mod params;
mod report;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::sample_variance;
use crate::spikeslab::{build_prior, draw_beta_sigma_from_stats, gibbs_sweep_gamma, SpikeSlabConfig, SufficientStats};
use crate::statespace::{assemble, simulate_states, Component, StateSpaceModel};
use crate::timeseries::{ModelInputs, TimeSeries, YearMonth};

pub use forecast::{forecast, ForecastResult};
pub use params::{draw_component_params, VariancePrior, MAX_AR_TRIES};
pub use report::{inclusion_probabilities, write_draws_csv, FitSummary, Inclusion, ParameterSummary, SCHEMA_VERSION};

const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// Structural components named without parameter values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ComponentSpec {
    LocalLevel,
    LocalLinearTrend,
    Ar {
        #[serde(default = "default_ar_order")]
        order: usize,
    },
    Seasonal {
        #[serde(default = "default_period")]
        period: usize,
    },
}

fn default_ar_order() -> usize {
    1
}

fn default_period() -> usize {
    12
}

impl ComponentSpec {
    /// Starting parameters: every variance at `scale`, AR coefficients at zero.
    pub fn initial(&self, scale: f64) -> Component {
        match self {
            ComponentSpec::LocalLevel => Component::local_level(scale),
            ComponentSpec::LocalLinearTrend => Component::local_linear_trend(scale, scale),
            ComponentSpec::Ar { order } => Component::ar(vec![0.0; *order], scale),
            ComponentSpec::Seasonal { period } => Component::seasonal(*period, scale),
        }
    }

    /// Local level, AR(1) and a monthly seasonal.
    pub fn default_set() -> Vec<ComponentSpec> {
        vec![
            ComponentSpec::LocalLevel,
            ComponentSpec::Ar { order: 1 },
            ComponentSpec::Seasonal { period: 12 },
        ]
    }
}

/// Component sets tuned per forecast horizon, keyed `h1`, `h3`, `h6`, `h12`, `h24`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    H1,
    H3,
    H6,
    H12,
    H24,
}

impl Preset {
    pub const ALL: [Preset; 5] = [Preset::H1, Preset::H3, Preset::H6, Preset::H12, Preset::H24];

    pub fn horizon(self) -> usize {
        match self {
            Preset::H1 => 1,
            Preset::H3 => 3,
            Preset::H6 => 6,
            Preset::H12 => 12,
            Preset::H24 => 24,
        }
    }

    pub fn components(self) -> Vec<ComponentSpec> {
        use ComponentSpec::*;
        let ar = Ar { order: 1 };
        let seasonal = Seasonal { period: 12 };
        match self {
            Preset::H1 | Preset::H3 => vec![LocalLevel, ar, seasonal],
            Preset::H6 => vec![LocalLinearTrend, ar, seasonal],
            Preset::H12 => vec![LocalLinearTrend],
            Preset::H24 => vec![LocalLevel, LocalLinearTrend, ar, seasonal],
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| format!("h{}", p.horizon()) == s.trim().to_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown preset {s:?}; expected one of h1, h3, h6, h12, h24")))
    }
}

/// The model being fitted, independent of the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelSpec {
    pub components: Vec<ComponentSpec>,
    pub prior: SpikeSlabConfig,
    /// Shape `a₀` of each component-variance prior.
    pub variance_shape: f64,
    /// Scale `b₀` as a fraction of the sample variance of `y`.
    pub variance_scale_fraction: f64,
    /// Absolute `b₀`, overriding the fraction.
    pub variance_scale: Option<f64>,
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self {
            components: ComponentSpec::default_set(),
            prior: SpikeSlabConfig::default(),
            variance_shape: 0.01,
            variance_scale_fraction: 0.01,
            variance_scale: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McmcConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub chains: usize,
    /// Keep the full state path of every retained draw.
    pub keep_paths: bool,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            iterations: 2000,
            burn_in: 500,
            seed: 0,
            chains: 2,
            keep_paths: false,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.iterations {
            return Err(Error::Config(format!(
                "burn-in ({}) must be less than iterations ({})",
                self.burn_in, self.iterations
            )));
        }
        if self.chains == 0 {
            return Err(Error::Config("need at least one chain".into()));
        }
        Ok(())
    }

    pub fn retained_per_chain(&self) -> usize {
        self.iterations - self.burn_in
    }
}

/// Response and optional predictors on a common monthly index.
#[derive(Debug, Clone)]
pub struct FitData {
    pub y: Vec<Option<f64>>,
    pub x: Option<DMatrix<f64>>,
    pub names: Vec<String>,
    pub start: Option<YearMonth>,
}

impl FitData {
    pub fn univariate(y: &TimeSeries) -> Self {
        Self {
            y: y.values().to_vec(),
            x: None,
            names: Vec::new(),
            start: Some(y.start()),
        }
    }

    pub fn from_values(y: &[f64], x: Option<DMatrix<f64>>, names: Vec<String>) -> Self {
        Self {
            y: y.iter().map(|v| Some(*v)).collect(),
            x,
            names,
            start: None,
        }
    }

    pub fn k(&self) -> usize {
        self.x.as_ref().map_or(0, DMatrix::ncols)
    }
}

impl From<ModelInputs> for FitData {
    fn from(m: ModelInputs) -> Self {
        let x = (m.x.ncols() > 0).then_some(m.x);
        Self {
            y: m.y.values().to_vec(),
            x,
            names: m.names,
            start: Some(m.y.start()),
        }
    }
}

/// One retained iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct Draw {
    pub chain: usize,
    pub iteration: usize,
    pub components: Vec<Component>,
    pub beta: Vec<f64>,
    pub gamma: Vec<bool>,
    pub sigma2: f64,
    /// `α_T`, the state at the last time point.
    pub final_state: DVector<f64>,
    pub path: Option<DMatrix<f64>>,
    pub log_likelihood: f64,
}

/// Retained draws from every chain, chain 0 first.
#[derive(Debug, Clone)]
pub struct PosteriorDraws {
    pub draws: Vec<Draw>,
    pub predictor_names: Vec<String>,
    pub component_specs: Vec<ComponentSpec>,
    pub config: McmcConfig,
    pub n: usize,
    pub start: Option<YearMonth>,
    /// Posterior mean of each component's contribution `Zᵀα_t`, one row per component.
    pub component_means: DMatrix<f64>,
    /// Conditional observation log-likelihood at every iteration, per chain.
    pub log_likelihood_trace: Vec<Vec<f64>>,
}

impl PosteriorDraws {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn n_predictors(&self) -> usize {
        self.predictor_names.len()
    }

    /// Model layout with the parameters of draw `i`.
    pub fn model(&self, i: usize) -> Result<StateSpaceModel> {
        let d = &self.draws[i];
        Ok(assemble(&d.components, self.n_predictors())?.with_obs_variance(d.sigma2))
    }
}

struct ChainOutput {
    draws: Vec<Draw>,
    component_sum: DMatrix<f64>,
    trace: Vec<f64>,
}

/// Fits the model by Gibbs sampling.
pub fn fit(spec: &ModelSpec, data: &FitData, mcmc: &McmcConfig) -> Result<PosteriorDraws> {
    mcmc.validate()?;
    let n = data.y.len();
    if let Some(x) = &data.x {
        if x.nrows() != n {
            return Err(Error::Alignment(format!("design has {} rows, response {n}", x.nrows())));
        }
        if x.ncols() != data.names.len() {
            return Err(Error::Dimension(format!("{} predictor names for {} columns", data.names.len(), x.ncols())));
        }
    }
    if spec.components.is_empty() {
        return Err(Error::EmptyModel);
    }
    let observed: Vec<usize> = (0..n).filter(|&t| data.y[t].is_some()).collect();
    if observed.len() < 3 {
        return Err(Error::InsufficientData(format!("{} observed points", observed.len())));
    }
    let y_obs: Vec<f64> = observed.iter().map(|&t| data.y[t].unwrap()).collect();
    let var_y = sample_variance(&y_obs);
    if !(var_y > 0.0 && var_y.is_finite()) {
        return Err(Error::Domain("response has zero variance".into()));
    }
    let setup = Setup::new(spec, data, &observed, &y_obs, var_y)?;

    let outputs: Vec<Result<ChainOutput>> = (0..mcmc.chains)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(mcmc.seed);
            rng.set_stream(c as u64);
            run_chain(&setup, data, mcmc, c, &mut rng)
        })
        .collect();

    let comps = setup.components.len();
    let mut component_sum = DMatrix::zeros(comps, n);
    let mut draws = Vec::with_capacity(mcmc.chains * mcmc.retained_per_chain());
    let mut traces = Vec::with_capacity(mcmc.chains);
    for out in outputs {
        let out = out?;
        component_sum += out.component_sum;
        draws.extend(out.draws);
        traces.push(out.trace);
    }
    let component_means = component_sum / draws.len() as f64;
    Ok(PosteriorDraws {
        draws,
        predictor_names: data.names.clone(),
        component_specs: spec.components.clone(),
        config: mcmc.clone(),
        n,
        start: data.start,
        component_means,
        log_likelihood_trace: traces,
    })
}

/// Data-dependent quantities shared by every chain.
struct Setup {
    components: Vec<Component>,
    variance_prior: VariancePrior,
    observed: Vec<usize>,
    y_obs: Vec<f64>,
    regression: Option<Regression>,
    nu: f64,
    ss: f64,
    sigma2_init: f64,
}

struct Regression {
    x_obs: DMatrix<f64>,
    prior: crate::spikeslab::SpikeSlabPrior,
    stats: SufficientStats,
}

impl Setup {
    fn new(spec: &ModelSpec, data: &FitData, observed: &[usize], y_obs: &[f64], var_y: f64) -> Result<Self> {
        let scale = spec.variance_scale.unwrap_or(spec.variance_scale_fraction * var_y);
        let variance_prior = VariancePrior::new(spec.variance_shape, scale)?;
        let components: Vec<Component> = spec.components.iter().map(|c| c.initial(0.1 * var_y)).collect();
        for c in &components {
            c.validate()?;
        }
        let regression = match &data.x {
            Some(x) if x.ncols() > 0 => {
                let x_obs = x.select_rows(observed);
                let prior = build_prior(&x_obs, y_obs, &spec.prior)?;
                let stats = SufficientStats::new(&x_obs, y_obs)?;
                Some(Regression { x_obs, prior, stats })
            }
            _ => None,
        };
        let (nu, ss) = match &regression {
            Some(r) => (r.prior.nu, r.prior.ss),
            None => spec.prior.sigma_prior(y_obs.len(), var_y)?,
        };
        Ok(Self {
            components,
            variance_prior,
            observed: observed.to_vec(),
            y_obs: y_obs.to_vec(),
            regression,
            nu,
            ss,
            sigma2_init: 0.5 * var_y,
        })
    }
}

fn run_chain<R: Rng>(setup: &Setup, data: &FitData, mcmc: &McmcConfig, chain: usize, rng: &mut R) -> Result<ChainOutput> {
    let n = data.y.len();
    let k = setup.regression.as_ref().map_or(0, |r| r.x_obs.ncols());
    let mut model = assemble(&setup.components, k)?;
    let mut components = setup.components.clone();
    let mut sigma2 = setup.sigma2_init;
    let mut beta = DVector::<f64>::zeros(k);
    let mut gamma = vec![false; k];
    let offsets: Vec<(usize, usize)> = model.blocks.iter().map(|b| (b.state_offset, b.component.state_dim())).collect();

    let mut draws = Vec::with_capacity(mcmc.retained_per_chain());
    let mut component_sum = DMatrix::zeros(components.len(), n);
    let mut trace = Vec::with_capacity(mcmc.iterations);
    let mut y_adj: Vec<Option<f64>> = data.y.clone();

    for iter in 0..mcmc.iterations {
        let diverged = |message: String| Error::Divergence { iteration: iter, message };

        // 1. states given parameters and the regression offset
        if let Some(x) = &data.x {
            for t in 0..n {
                y_adj[t] = data.y[t].map(|v| v - x.row(t).transpose().dot(&beta));
            }
        }
        model.obs_variance = sigma2;
        let states = simulate_states(&model, &y_adj, rng).map_err(|e| diverged(e.to_string()))?;

        // 2. component parameters given states
        components = draw_component_params(&components, &states.states, &setup.variance_prior, rng).map_err(|e| match e {
            Error::Stationarity { .. } => e,
            other => diverged(other.to_string()),
        })?;
        model.update_components(&components)?;

        // 3. regression and observation variance given states
        let signal = states.signal(&model);
        let y_star: Vec<f64> = setup.observed.iter().zip(&setup.y_obs).map(|(&t, v)| v - signal[t]).collect();
        let fitted: Vec<f64> = match &setup.regression {
            Some(r) => {
                let stats = r.stats.with_response(&r.x_obs, &y_star);
                gibbs_sweep_gamma(&r.prior, &stats, &mut gamma, rng)?;
                let (b, s2) = draw_beta_sigma_from_stats(&r.prior, &stats, &gamma, rng)?;
                beta = b;
                sigma2 = s2;
                (&r.x_obs * &beta).iter().copied().collect()
            }
            None => {
                let ss: f64 = y_star.iter().map(|v| v * v).sum();
                sigma2 = params::inverse_gamma((y_star.len() as f64 + setup.nu) / 2.0, (setup.ss + ss) / 2.0, rng);
                vec![0.0; y_star.len()]
            }
        };
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(diverged(format!("observation variance draw {sigma2}")));
        }
        let rss: f64 = y_star.iter().zip(&fitted).map(|(a, b)| (a - b).powi(2)).sum();
        let m = y_star.len() as f64;
        let loglik = -0.5 * (m * (LN_2PI + sigma2.ln()) + rss / sigma2);
        if !loglik.is_finite() {
            return Err(diverged("log-likelihood".into()));
        }
        trace.push(loglik);

        if iter >= mcmc.burn_in {
            for (ci, &(off, _)) in offsets.iter().enumerate() {
                for t in 0..n {
                    component_sum[(ci, t)] += states.states[(off, t)];
                }
            }
            draws.push(Draw {
                chain,
                iteration: iter,
                components: components.clone(),
                beta: beta.iter().copied().collect(),
                gamma: gamma.clone(),
                sigma2,
                final_state: states.state(n - 1),
                path: mcmc.keep_paths.then(|| states.states.clone()),
                log_likelihood: loglik,
            });
        }
    }
    Ok(ChainOutput {
        draws,
        component_sum,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::StandardNormal;

    fn local_level_data(n: usize, sigma_u: f64, sigma_e: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut mu = 10.0;
        (0..n)
            .map(|_| {
                mu += sigma_u * rng.sample::<f64, _>(StandardNormal);
                mu + sigma_e * rng.sample::<f64, _>(StandardNormal)
            })
            .collect()
    }

    fn short() -> McmcConfig {
        McmcConfig {
            iterations: 300,
            burn_in: 100,
            seed: 3,
            chains: 2,
            keep_paths: false,
        }
    }

    #[test]
    fn config_validation() {
        let bad = McmcConfig {
            burn_in: 10,
            iterations: 10,
            ..Default::default()
        };
        assert!(matches!(bad.validate(), Err(Error::Config(_))));
        assert!(McmcConfig { chains: 0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn chains_are_reproducible() {
        let y = local_level_data(80, 0.2, 1.0, 1);
        let spec = ModelSpec {
            components: vec![ComponentSpec::LocalLevel],
            ..Default::default()
        };
        let data = FitData::from_values(&y, None, vec![]);
        let a = fit(&spec, &data, &short()).unwrap();
        let b = fit(&spec, &data, &short()).unwrap();
        assert_eq!(a.draws, b.draws);
        assert_eq!(a.len(), 400);
        assert_ne!(a.draws[0].sigma2, a.draws[200].sigma2);
    }

    #[test]
    fn beta_zero_exactly_where_excluded() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 120;
        let x = DMatrix::from_fn(n, 4, |_, _| rng.sample::<f64, _>(StandardNormal));
        let mut y = local_level_data(n, 0.1, 0.5, 2);
        for t in 0..n {
            y[t] += 2.0 * x[(t, 1)];
        }
        let names = (0..4).map(|i| format!("x{i}")).collect();
        let data = FitData::from_values(&y, Some(x), names);
        let spec = ModelSpec {
            components: vec![ComponentSpec::LocalLevel],
            ..Default::default()
        };
        let post = fit(&spec, &data, &short()).unwrap();
        for d in &post.draws {
            for (b, g) in d.beta.iter().zip(&d.gamma) {
                assert_eq!(*b == 0.0, !g);
            }
        }
        let probs = inclusion_probabilities(&post);
        assert_eq!(probs[0].name, "x1");
        assert!(probs[0].probability > 0.95);
        assert!(post.log_likelihood_trace.iter().flatten().all(|v| v.is_finite()));
    }

    #[test]
    fn missing_observations_are_allowed() {
        let y = local_level_data(60, 0.2, 0.5, 4);
        let mut data = FitData::from_values(&y, None, vec![]);
        data.y[10] = None;
        data.y[59] = None;
        let spec = ModelSpec {
            components: vec![ComponentSpec::LocalLevel, ComponentSpec::Seasonal { period: 4 }],
            ..Default::default()
        };
        let post = fit(&spec, &data, &short()).unwrap();
        assert_eq!(post.component_means.shape(), (2, 60));
        assert!(post.draws.iter().all(|d| d.final_state.len() == 4));
    }

    #[test]
    fn design_size_mismatch() {
        let y = local_level_data(30, 0.2, 0.5, 4);
        let data = FitData::from_values(&y, Some(DMatrix::zeros(29, 1)), vec!["a".into()]);
        assert!(matches!(fit(&ModelSpec::default(), &data, &short()), Err(Error::Alignment(_))));
    }

    #[test]
    fn presets_parse_and_assemble() {
        for p in Preset::ALL {
            let parsed: Preset = format!("h{}", p.horizon()).parse().unwrap();
            assert_eq!(parsed, p);
            let comps: Vec<_> = p.components().iter().map(|c| c.initial(1.0)).collect();
            assert!(assemble(&comps, 0).is_ok());
        }
        assert_eq!(Preset::H24.components().len(), 4);
        assert!("h2".parse::<Preset>().is_err());
    }
}
