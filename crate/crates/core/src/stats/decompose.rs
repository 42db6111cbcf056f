//! Classical moving-average decomposition and trend/seasonality strengths.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Trend and seasonality strengths derived from a decomposition,
/// each clamped to [0, 1]. Seasonal strength is absent when the series is
/// too short for a seasonal estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionStrengths {
    pub trend_strength: f64,
    pub seasonal_strength: Option<f64>,
}

/// Centered moving average of order `window`. Even orders use the standard
/// 2xm weighting so the average stays centered. Entries without full support
/// are `None`.
fn centered_ma(x: &[f64], window: usize) -> Vec<Option<f64>> {
    let n = x.len();
    let mut out = vec![None; n];
    if window < 2 || n < window + (window % 2 == 0) as usize {
        return out;
    }
    if window % 2 == 1 {
        let half = window / 2;
        for t in half..n - half {
            let s: f64 = x[t - half..=t + half].iter().sum();
            out[t] = Some(s / window as f64);
        }
    } else {
        let half = window / 2;
        for t in half..n - half {
            let mut s = 0.5 * (x[t - half] + x[t + half]);
            s += x[t - half + 1..t + half].iter().sum::<f64>();
            out[t] = Some(s / window as f64);
        }
    }
    out
}

fn variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64
}

/// Classical additive decomposition strengths:
/// trend = max(0, 1 - Var(R)/Var(T+R)), seasonal = max(0, 1 - Var(R)/Var(S+R)),
/// computed over the indices where the trend estimate is defined.
pub fn strengths(values: &[f64], frequency: usize) -> Result<DecompositionStrengths> {
    let n = values.len();
    if n < 8 {
        return Err(Error::Precondition(format!(
            "strengths needs length >= 8, got {n}"
        )));
    }
    let seasonal_possible = frequency > 1 && n >= 2 * frequency;

    let trend_window = if seasonal_possible {
        frequency
    } else {
        // Trend-only smoother: roughly a quarter of the series, odd, >= 3.
        let w = (n / 4).max(3);
        if w % 2 == 0 {
            w + 1
        } else {
            w
        }
    };
    let trend = centered_ma(values, trend_window);

    // Seasonal component from position means of the detrended series.
    let seasonal: Vec<f64> = if seasonal_possible {
        let mut sums = vec![0.0; frequency];
        let mut counts = vec![0usize; frequency];
        for (t, tr) in trend.iter().enumerate() {
            if let Some(tv) = tr {
                sums[t % frequency] += values[t] - tv;
                counts[t % frequency] += 1;
            }
        }
        let mut means: Vec<f64> = sums
            .iter()
            .zip(counts.iter())
            .map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
            .collect();
        let grand = means.iter().sum::<f64>() / frequency as f64;
        for m in means.iter_mut() {
            *m -= grand;
        }
        (0..n).map(|t| means[t % frequency]).collect()
    } else {
        vec![0.0; n]
    };

    let mut remainder = Vec::new();
    let mut detrended = Vec::new(); // S + R = x - T
    let mut deseasonalised = Vec::new(); // T + R = x - S
    for (t, tr) in trend.iter().enumerate() {
        if let Some(tv) = tr {
            let r = values[t] - tv - seasonal[t];
            remainder.push(r);
            detrended.push(values[t] - tv);
            deseasonalised.push(values[t] - seasonal[t]);
        }
    }
    if remainder.len() < 2 {
        return Err(Error::Precondition(
            "series too short for the decomposition window".into(),
        ));
    }

    let var_r = variance(&remainder);
    let var_tr = variance(&deseasonalised);
    let var_sr = variance(&detrended);

    let trend_strength = if var_tr <= 1e-12 {
        0.0
    } else {
        (1.0 - var_r / var_tr).clamp(0.0, 1.0)
    };
    let seasonal_strength = if !seasonal_possible {
        None
    } else if var_sr <= 1e-12 {
        Some(0.0)
    } else {
        Some((1.0 - var_r / var_sr).clamp(0.0, 1.0))
    };

    Ok(DecompositionStrengths {
        trend_strength,
        seasonal_strength,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn linear_ramp_has_full_trend_strength() {
        let x: Vec<f64> = (0..96).map(|t| 3.0 + 0.5 * t as f64).collect();
        let s = strengths(&x, 12).unwrap();
        assert!(s.trend_strength > 0.99, "trend {}", s.trend_strength);
        assert!(s.seasonal_strength.unwrap() < 0.05);
    }

    #[test]
    fn sinusoid_has_full_seasonal_strength() {
        let x: Vec<f64> = (0..96)
            .map(|t| (2.0 * std::f64::consts::PI * t as f64 / 12.0).sin())
            .collect();
        let s = strengths(&x, 12).unwrap();
        assert!(
            s.seasonal_strength.unwrap() > 0.99,
            "seasonal {:?}",
            s.seasonal_strength
        );
    }

    #[test]
    fn noisy_trend_plus_season_within_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x: Vec<f64> = (0..240)
            .map(|t| {
                let e: f64 = StandardNormal.sample(&mut rng);
                0.2 * t as f64
                    + 4.0 * (2.0 * std::f64::consts::PI * t as f64 / 12.0).sin()
                    + 0.8 * e
            })
            .collect();
        let s = strengths(&x, 12).unwrap();
        assert!(s.trend_strength > 0.5 && s.trend_strength <= 1.0);
        let sea = s.seasonal_strength.unwrap();
        assert!(sea > 0.5 && sea <= 1.0);
    }

    #[test]
    fn short_series_has_no_seasonal_strength() {
        let x: Vec<f64> = (0..16).map(|t| t as f64 + (t % 3) as f64).collect();
        let s = strengths(&x, 12).unwrap();
        assert!(s.seasonal_strength.is_none());
        assert!(s.trend_strength >= 0.0 && s.trend_strength <= 1.0);
    }

    #[test]
    fn strengths_always_in_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..25 {
            let x: Vec<f64> = (0..60).map(|_| StandardNormal.sample(&mut rng)).collect();
            let s = strengths(&x, 12).unwrap();
            assert!((0.0..=1.0).contains(&s.trend_strength));
            if let Some(v) = s.seasonal_strength {
                assert!((0.0..=1.0).contains(&v));
            }
        }
    }
}
