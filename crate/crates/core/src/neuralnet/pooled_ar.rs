//! Pooled AR(q) global model: one ordinary-least-squares autoregression
//! over every series' stacked raw windows.

use serde::{Deserialize, Serialize};

use crate::dataset::{make_windows, Segment, TimeSeriesSet, WindowSpec};
use crate::error::{Error, Result};
use crate::linalg;

/// Pooled autoregression x_t = b0 + b1 x_{t-1} + ... + bq x_{t-q}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PooledAr {
    /// Coefficients [b0, b1, .., bq]; b_j multiplies lag j.
    pub coeffs: Vec<f64>,
    pub order: usize,
}

impl PooledAr {
    /// One-step forecast from a raw window ordered oldest-first (the same
    /// layout the windowing code produces).
    pub fn forecast(&self, window: &[f64]) -> Result<f64> {
        if window.len() != self.order {
            return Err(Error::Shape(format!(
                "window length {} != AR order {}",
                window.len(),
                self.order
            )));
        }
        let mut v = self.coeffs[0];
        for j in 1..=self.order {
            v += self.coeffs[j] * window[window.len() - j];
        }
        Ok(v)
    }
}

/// Fit the pooled AR by OLS on all training windows of the set, in the raw
/// (unnormalized) scale.
pub fn pooled_ar_fit(set: &TimeSeriesSet, q: usize) -> Result<PooledAr> {
    let spec = WindowSpec::new(q)?;
    let batch = make_windows(set, spec, Segment::Train)?;
    if batch.len() <= q + 1 {
        return Err(Error::Precondition(format!(
            "pooled AR needs more than q+1 = {} rows, got {}",
            q + 1,
            batch.len()
        )));
    }
    let mut rows = Vec::with_capacity(batch.len());
    let mut ys = Vec::with_capacity(batch.len());
    for i in 0..batch.len() {
        let (window, target) = batch.raw_row(i);
        let mut row = Vec::with_capacity(q + 1);
        row.push(1.0);
        for j in 1..=q {
            row.push(window[window.len() - j]);
        }
        rows.push(row);
        ys.push(target);
    }
    let coeffs = linalg::least_squares(&rows, &ys, 0.0)?;
    Ok(PooledAr { coeffs, order: q })
}
