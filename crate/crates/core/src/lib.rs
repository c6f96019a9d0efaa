//! Bayesian structural time-series forecasting.
//!
//! The crate is organised by capability:
//!
//! * [`timeseries`]: monthly series ingestion, transforms, alignment and
//!   descriptive diagnostics.
//! * [`statespace`]: structural components, Kalman filtering, smoothing and
//!   posterior state simulation.
//! * [`spikeslab`]: the conjugate spike-and-slab regression prior and its
//!   collapsed posterior algebra.
//! * [`sampler`]: the Gibbs sampler tying the two together, posterior
//!   predictive forecasts and inclusion probabilities.
//! * [`screen`]: pairwise causal screening of candidate predictors.
//! * [`lp`]: local-projection impulse responses with Newey–West bands.
//! * [`eval`]: point-forecast metrics, Murphy diagrams and multiple
//!   comparisons with the best.
//! * [`run`]: configuration-driven pipelines behind the `bsts` binary.

#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod eval;
pub mod linalg;
pub mod lp;
pub mod run;
pub mod sampler;
pub mod screen;
pub mod spikeslab;
pub mod statespace;
pub mod timeseries;

pub use error::{Error, Result};
