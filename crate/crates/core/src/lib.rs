//! Two-stage global time-series forecasting.
//!
//! Stage one fits a single global model (pooled AR, MLP, or LSTM) across a
//! collection of series. Residual white-noise screening then identifies the
//! series the global model failed to capture, and stage two corrects them
//! with either per-series ARIMA models or cluster-specific sub-global
//! networks built by freezing the stage-one trunk. An evaluation harness
//! computes cumulative one-step-ahead errors and model-comparison
//! significance tests.

pub mod clustering;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod linalg;
pub mod localmodels;
pub mod neuralnet;
pub mod pipeline;
pub mod poly;
pub mod stats;

pub use error::{Error, Result};
