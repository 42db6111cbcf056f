//! Autocorrelation, partial autocorrelation, and the autocorrelation-adjusted
//! effective sample size.

use crate::error::{Error, Result};

/// Biased sample autocorrelations rho(1..max_lag).
///
/// Uses the standard estimator with the full-sample variance in the
/// denominator, so |rho(j)| <= 1.
pub fn acf(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = series.len();
    if max_lag < 1 || n <= max_lag {
        return Err(Error::Precondition(format!(
            "acf needs length > max_lag >= 1, got n={n}, max_lag={max_lag}"
        )));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let var: f64 = centered.iter().map(|v| v * v).sum();
    if var <= 0.0 {
        return Err(Error::DegenerateSeries(
            "zero-variance series has no autocorrelation".into(),
        ));
    }
    let mut out = Vec::with_capacity(max_lag);
    for lag in 1..=max_lag {
        let cov: f64 = centered[lag..]
            .iter()
            .zip(centered.iter())
            .map(|(a, b)| a * b)
            .sum();
        out.push(cov / var);
    }
    Ok(out)
}

/// Partial autocorrelations phi_{jj} for j = 1..max_lag via Durbin-Levinson.
pub fn pacf(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let rho = acf(series, max_lag)?;
    let mut phi_prev = vec![0.0; max_lag + 1];
    let mut phi = vec![0.0; max_lag + 1];
    let mut out = Vec::with_capacity(max_lag);

    for j in 1..=max_lag {
        let phi_jj = if j == 1 {
            rho[0]
        } else {
            let mut num = rho[j - 1];
            let mut den = 1.0;
            for k in 1..j {
                num -= phi_prev[k] * rho[j - 1 - k];
                den -= phi_prev[k] * rho[k - 1];
            }
            if den.abs() < 1e-12 {
                0.0
            } else {
                num / den
            }
        };
        phi[j] = phi_jj;
        for k in 1..j {
            phi[k] = phi_prev[k] - phi_jj * phi_prev[j - k];
        }
        out.push(phi_jj);
        phi_prev[..=j].copy_from_slice(&phi[..=j]);
    }
    Ok(out)
}

/// Outcome of the effective-sample-size calculation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveSampleSize {
    /// Adjusted count n', clamped to [1, n].
    pub n_prime: f64,
    /// True when the series was degenerate and n' defaulted to n.
    pub degenerate: bool,
}

/// Autocorrelation-adjusted effective sample size
/// n' = n * [sum_{j=-(n-1)}^{n-1} (1 - |j|/n) rho(j)]^{-1}.
///
/// The sum is truncated at the first lag where |rho(j)| falls below
/// 2/sqrt(n); longer lags are noise-dominated. The result is clamped to
/// [1, n].
pub fn effective_sample_size(series: &[f64]) -> Result<EffectiveSampleSize> {
    let n = series.len();
    if n < 2 {
        return Ok(EffectiveSampleSize {
            n_prime: n.max(1) as f64,
            degenerate: false,
        });
    }
    let rho = match acf(series, n - 1) {
        Ok(r) => r,
        Err(Error::DegenerateSeries(_)) => {
            return Ok(EffectiveSampleSize {
                n_prime: n as f64,
                degenerate: true,
            });
        }
        Err(e) => return Err(e),
    };
    let cutoff = 2.0 / (n as f64).sqrt();
    let mut denom = 1.0;
    for (idx, &r) in rho.iter().enumerate() {
        if r.abs() < cutoff {
            break;
        }
        let j = (idx + 1) as f64;
        denom += 2.0 * (1.0 - j / n as f64) * r;
    }
    let raw = if denom.abs() < 1e-12 {
        n as f64
    } else {
        n as f64 / denom
    };
    Ok(EffectiveSampleSize {
        n_prime: raw.clamp(1.0, n as f64),
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn ar1(phi: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = 0.0;
        let mut out = Vec::with_capacity(n);
        for _ in 0..n + 50 {
            let e: f64 = StandardNormal.sample(&mut rng);
            x = phi * x + e;
            out.push(x);
        }
        out.split_off(50)
    }

    #[test]
    fn alternating_series_has_rho1_near_minus_one() {
        let x: Vec<f64> = (0..64).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let rho = acf(&x, 2).unwrap();
        assert!(rho[0] < -0.95, "rho(1) = {}", rho[0]);
    }

    #[test]
    fn iid_noise_acf_small() {
        let x = ar1(0.0, 1000, 7);
        let rho = acf(&x, 20).unwrap();
        let bound = 3.0 / (1000f64).sqrt();
        let big = rho.iter().filter(|r| r.abs() >= bound).count();
        assert!(big <= 2, "{big} lags exceeded 3/sqrt(n)");
    }

    #[test]
    fn ar1_acf_matches_phi() {
        let x = ar1(0.8, 2000, 11);
        let rho = acf(&x, 3).unwrap();
        assert!((rho[0] - 0.8).abs() < 0.05, "rho(1) = {}", rho[0]);
    }

    #[test]
    fn constant_series_is_degenerate() {
        let x = vec![3.0; 50];
        assert!(matches!(acf(&x, 5), Err(Error::DegenerateSeries(_))));
    }

    #[test]
    fn pacf_of_ar1_cuts_off_after_lag_one() {
        let x = ar1(0.7, 4000, 3);
        let p = pacf(&x, 5).unwrap();
        assert!((p[0] - 0.7).abs() < 0.05);
        for &v in &p[1..] {
            assert!(v.abs() < 0.08, "pacf tail too large: {v}");
        }
    }

    #[test]
    fn ess_equals_n_for_whitened_series() {
        // All |rho(j)| below the 2/sqrt(n) cutoff -> denominator is exactly 1.
        let x = ar1(0.0, 500, 21);
        let rho = acf(&x, 499).unwrap();
        let cutoff = 2.0 / (500f64).sqrt();
        if rho[0].abs() < cutoff {
            let e = effective_sample_size(&x).unwrap();
            assert_relative_eq!(e.n_prime, 500.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn ess_ar1_matches_closed_form() {
        // n' ~= n (1 - phi)/(1 + phi) = n/3 for phi = 0.5.
        let mut vals = Vec::new();
        for seed in 0..5 {
            let x = ar1(0.5, 2000, 100 + seed);
            vals.push(effective_sample_size(&x).unwrap().n_prime);
        }
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let target = 2000.0 / 3.0;
        assert!(
            (mean - target).abs() < 0.1 * target,
            "mean ESS {mean}, target {target}"
        );
    }

    #[test]
    fn ess_single_point_clamps_to_one() {
        let e = effective_sample_size(&[5.0]).unwrap();
        assert_eq!(e.n_prime, 1.0);
    }

    #[test]
    fn ess_degenerate_flagged() {
        let e = effective_sample_size(&[2.0; 30]).unwrap();
        assert!(e.degenerate);
        assert_eq!(e.n_prime, 30.0);
    }
}
