//! Disease-incidence nowcasting from news-derived word-count tuples.
//!
//! The pipeline has three stages:
//!
//! 1. [`topic_model`] — a seed-word-supervised temporal topic model over
//!    `{word, location, time}: count` tuples, fit by collapsed Gibbs
//!    sampling. Its main product is `xi`, a per-topic probability
//!    distribution over time points (the topic's temporal trend).
//! 2. [`trend_sampling`] — multinomial sampling that rescales a temporal
//!    trend to the numerical range of an official case-count series.
//! 3. [`estimators`] — one-step-ahead case-count estimators: an
//!    Elastic-Net-regularized autoregression with external news trends
//!    (ARNet) and ARMA/ARMAX baselines.
//!
//! [`evaluation`] ties the stages together in a rolling-origin backtest
//! with per-horizon re-inference and NRMSE scoring, and [`corpus`] holds
//! the input data model and file formats.
//!
//! With the default `parallel` feature, evaluation horizons, grid-search
//! points, and cross-validation folds run on a rayon pool; results are
//! reduced in a fixed order so any job count produces identical output.

pub mod corpus;
pub mod error;
pub mod estimators;
pub mod evaluation;
pub mod exec;
pub mod rng;
pub mod topic_model;
pub mod trend_sampling;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
