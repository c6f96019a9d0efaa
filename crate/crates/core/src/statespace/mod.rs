//! Linear Gaussian state-space models built from structural components.
//!
//! ```text
//! y_t     = Zᵀ α_t + ε_t,        ε_t ~ N(0, σ²_ε)
//! α_{t+1} = T α_t + R η_t,       η_t ~ N(0, diag(q))
//! α_0     ~ N(a₁, P₁)
//! ```
//!
//! Regression effects do not live in the state: callers subtract `βᵀx_t` from
//! `y_t` before filtering.

mod filter;
mod simulate;
mod smoother;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use filter::{kalman_filter, FilterResult};
pub use simulate::{simulate_states, StateDraw};
pub use smoother::{kalman_smoother, smoothed_means, SmootherResult};

/// Prior variance used for nonstationary initial states.
pub const DIFFUSE_VARIANCE: f64 = 1e6;

/// A structural building block and its current parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Component {
    /// `μ_{t+1} = μ_t + u_t`
    LocalLevel { sigma2: f64 },
    /// `μ_{t+1} = μ_t + δ_t + u_t`, `δ_{t+1} = δ_t + v_t`
    LocalLinearTrend { level_sigma2: f64, slope_sigma2: f64 },
    /// `μ_{t+1} = Σ φ_i μ_{t+1−i} + ũ_t`
    Ar { coefficients: Vec<f64>, sigma2: f64 },
    /// `τ_{t+1} = −Σ_{s=0}^{S−2} τ_{t−s} + w_t`
    Seasonal { period: usize, sigma2: f64 },
}

impl Component {
    pub fn local_level(sigma2: f64) -> Self {
        Component::LocalLevel { sigma2 }
    }

    pub fn local_linear_trend(level_sigma2: f64, slope_sigma2: f64) -> Self {
        Component::LocalLinearTrend {
            level_sigma2,
            slope_sigma2,
        }
    }

    pub fn ar(coefficients: Vec<f64>, sigma2: f64) -> Self {
        Component::Ar { coefficients, sigma2 }
    }

    pub fn seasonal(period: usize, sigma2: f64) -> Self {
        Component::Seasonal { period, sigma2 }
    }

    pub fn name(&self) -> String {
        match self {
            Component::LocalLevel { .. } => "local_level".into(),
            Component::LocalLinearTrend { .. } => "local_linear_trend".into(),
            Component::Ar { coefficients, .. } => format!("ar({})", coefficients.len()),
            Component::Seasonal { period, .. } => format!("seasonal({period})"),
        }
    }

    pub fn state_dim(&self) -> usize {
        match self {
            Component::LocalLevel { .. } => 1,
            Component::LocalLinearTrend { .. } => 2,
            Component::Ar { coefficients, .. } => coefficients.len(),
            Component::Seasonal { period, .. } => period - 1,
        }
    }

    pub fn disturbance_dim(&self) -> usize {
        match self {
            Component::LocalLinearTrend { .. } => 2,
            _ => 1,
        }
    }

    /// Disturbance variances in loading order.
    pub fn variances(&self) -> Vec<f64> {
        match self {
            Component::LocalLevel { sigma2 } => vec![*sigma2],
            Component::LocalLinearTrend {
                level_sigma2,
                slope_sigma2,
            } => vec![*level_sigma2, *slope_sigma2],
            Component::Ar { sigma2, .. } => vec![*sigma2],
            Component::Seasonal { sigma2, .. } => vec![*sigma2],
        }
    }

    pub fn set_variances(&mut self, v: &[f64]) {
        match self {
            Component::LocalLevel { sigma2 } | Component::Ar { sigma2, .. } | Component::Seasonal { sigma2, .. } => {
                *sigma2 = v[0]
            }
            Component::LocalLinearTrend {
                level_sigma2,
                slope_sigma2,
            } => {
                *level_sigma2 = v[0];
                *slope_sigma2 = v[1];
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.variances().iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Config(format!("{}: variances must be positive and finite", self.name())));
        }
        match self {
            Component::Ar { coefficients, .. } if coefficients.is_empty() => {
                Err(Error::Config("AR order must be at least 1".into()))
            }
            Component::Ar { coefficients, .. } if coefficients.iter().any(|c| !c.is_finite()) => {
                Err(Error::Config("AR coefficients must be finite".into()))
            }
            Component::Seasonal { period, .. } if *period < 2 => {
                Err(Error::Config(format!("seasonal period must be at least 2, got {period}")))
            }
            _ => Ok(()),
        }
    }

    /// Observation loading, transition block and disturbance loading.
    fn blocks(&self) -> (DVector<f64>, DMatrix<f64>, DMatrix<f64>) {
        let m = self.state_dim();
        let mut z = DVector::zeros(m);
        z[0] = 1.0;
        let mut t = DMatrix::zeros(m, m);
        let mut r = DMatrix::zeros(m, self.disturbance_dim());
        r[(0, 0)] = 1.0;
        match self {
            Component::LocalLevel { .. } => t[(0, 0)] = 1.0,
            Component::LocalLinearTrend { .. } => {
                t[(0, 0)] = 1.0;
                t[(0, 1)] = 1.0;
                t[(1, 1)] = 1.0;
                r[(1, 1)] = 1.0;
            }
            Component::Ar { coefficients, .. } => {
                for (j, c) in coefficients.iter().enumerate() {
                    t[(0, j)] = *c;
                }
                for i in 1..m {
                    t[(i, i - 1)] = 1.0;
                }
            }
            Component::Seasonal { .. } => {
                for j in 0..m {
                    t[(0, j)] = -1.0;
                }
                for i in 1..m {
                    t[(i, i - 1)] = 1.0;
                }
            }
        }
        (z, t, r)
    }
}

/// Where a component's states and disturbances sit inside the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentBlock {
    pub component: Component,
    pub state_offset: usize,
    pub disturbance_offset: usize,
}

impl ComponentBlock {
    pub fn state_range(&self) -> std::ops::Range<usize> {
        self.state_offset..self.state_offset + self.component.state_dim()
    }

    pub fn disturbance_range(&self) -> std::ops::Range<usize> {
        self.disturbance_offset..self.disturbance_offset + self.component.disturbance_dim()
    }
}

/// Time-invariant system matrices plus component bookkeeping.
#[derive(Debug, Clone)]
pub struct StateSpaceModel {
    pub z: DVector<f64>,
    pub t: DMatrix<f64>,
    pub r: DMatrix<f64>,
    /// Diagonal of the disturbance covariance.
    pub q: DVector<f64>,
    pub obs_variance: f64,
    pub a1: DVector<f64>,
    pub p1: DMatrix<f64>,
    pub blocks: Vec<ComponentBlock>,
    pub n_predictors: usize,
}

/// Stacks components into one block-diagonal system.
///
/// The observation variance defaults to 1; set it with
/// [`StateSpaceModel::with_obs_variance`].
pub fn assemble(components: &[Component], n_predictors: usize) -> Result<StateSpaceModel> {
    if components.is_empty() && n_predictors == 0 {
        return Err(Error::EmptyModel);
    }
    for c in components {
        c.validate()?;
    }
    let m: usize = components.iter().map(Component::state_dim).sum();
    let qn: usize = components.iter().map(Component::disturbance_dim).sum();
    let mut model = StateSpaceModel {
        z: DVector::zeros(m),
        t: DMatrix::zeros(m, m),
        r: DMatrix::zeros(m, qn),
        q: DVector::zeros(qn),
        obs_variance: 1.0,
        a1: DVector::zeros(m),
        p1: DMatrix::zeros(m, m),
        blocks: Vec::with_capacity(components.len()),
        n_predictors,
    };
    let (mut so, mut dof) = (0, 0);
    for c in components {
        let (z, t, r) = c.blocks();
        let (ms, qs) = (c.state_dim(), c.disturbance_dim());
        model.z.rows_mut(so, ms).copy_from(&z);
        model.t.view_mut((so, so), (ms, ms)).copy_from(&t);
        model.r.view_mut((so, dof), (ms, qs)).copy_from(&r);
        model.q.rows_mut(dof, qs).copy_from(&DVector::from_vec(c.variances()));
        model.blocks.push(ComponentBlock {
            component: c.clone(),
            state_offset: so,
            disturbance_offset: dof,
        });
        so += ms;
        dof += qs;
    }
    model.reset_initial_covariance();
    Ok(model)
}

impl StateSpaceModel {
    pub fn state_dim(&self) -> usize {
        self.z.len()
    }

    pub fn with_obs_variance(mut self, sigma2: f64) -> Self {
        self.obs_variance = sigma2;
        self
    }

    pub fn with_initial(mut self, a1: DVector<f64>, p1: DMatrix<f64>) -> Result<Self> {
        let m = self.state_dim();
        if a1.len() != m || p1.shape() != (m, m) {
            return Err(Error::Dimension(format!("initial state must have dimension {m}")));
        }
        self.a1 = a1;
        self.p1 = p1;
        Ok(self)
    }

    pub fn components(&self) -> Vec<Component> {
        self.blocks.iter().map(|b| b.component.clone()).collect()
    }

    /// `R diag(q) Rᵀ`
    pub fn state_noise_cov(&self) -> DMatrix<f64> {
        let rq = &self.r * DMatrix::from_diagonal(&self.q);
        &rq * self.r.transpose()
    }

    /// Diffuse blocks get [`DIFFUSE_VARIANCE`]; stationary AR blocks get their
    /// stationary covariance.
    pub fn reset_initial_covariance(&mut self) {
        let m = self.state_dim();
        let mut p1 = DMatrix::zeros(m, m);
        for b in &self.blocks {
            let range = b.state_range();
            let ms = range.len();
            let stationary = match &b.component {
                Component::Ar { coefficients, sigma2 } if spectral_radius(coefficients) < 1.0 => {
                    let t = self.t.view((b.state_offset, b.state_offset), (ms, ms)).clone_owned();
                    let mut c = DMatrix::zeros(ms, ms);
                    c[(0, 0)] = *sigma2;
                    Some(stationary_covariance(&t, &c))
                }
                _ => None,
            };
            let block = stationary.unwrap_or_else(|| DMatrix::identity(ms, ms) * DIFFUSE_VARIANCE);
            p1.view_mut((b.state_offset, b.state_offset), (ms, ms)).copy_from(&block);
        }
        self.p1 = p1;
    }

    /// Replaces component parameters in place, keeping the layout.
    pub fn update_components(&mut self, components: &[Component]) -> Result<()> {
        if components.len() != self.blocks.len() {
            return Err(Error::Dimension("component count changed".into()));
        }
        for (i, c) in components.iter().enumerate() {
            if c.state_dim() != self.blocks[i].component.state_dim() || c.name() != self.blocks[i].component.name() {
                return Err(Error::Dimension(format!("component {i} changed shape")));
            }
            c.validate()?;
            let b = &self.blocks[i];
            let (_, t, _) = c.blocks();
            let ms = c.state_dim();
            self.t.view_mut((b.state_offset, b.state_offset), (ms, ms)).copy_from(&t);
            for (j, v) in c.variances().into_iter().enumerate() {
                self.q[b.disturbance_offset + j] = v;
            }
            self.blocks[i].component = c.clone();
        }
        self.reset_initial_covariance();
        Ok(())
    }
}

/// Largest modulus among the companion-matrix eigenvalues of an AR polynomial.
pub fn spectral_radius(coefficients: &[f64]) -> f64 {
    let p = coefficients.len();
    if p == 1 {
        return coefficients[0].abs();
    }
    let mut t = DMatrix::zeros(p, p);
    for (j, c) in coefficients.iter().enumerate() {
        t[(0, j)] = *c;
    }
    for i in 1..p {
        t[(i, i - 1)] = 1.0;
    }
    t.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Solves `P = T P Tᵀ + C` by the doubling iteration; `T` must be stable.
pub fn stationary_covariance(t: &DMatrix<f64>, c: &DMatrix<f64>) -> DMatrix<f64> {
    let mut a = t.clone();
    let mut p = c.clone();
    for _ in 0..64 {
        let next = &p + &a * &p * a.transpose();
        let delta = (&next - &p).abs().max();
        p = next;
        a = &a * &a;
        if delta <= 1e-14 * p.abs().max().max(1e-300) {
            break;
        }
    }
    crate::linalg::symmetrize(&mut p);
    p
}
