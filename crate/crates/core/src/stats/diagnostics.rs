//! Residual diagnostic tests: Ljung-Box portmanteau, Teräsvirta
//! non-linearity, ARCH Lagrange-multiplier, spectral entropy, and lumpiness.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::stats::acf::acf;
use crate::stats::dist::{chi_square_sf, student_t_cdf};

/// Outcome of a scalar hypothesis test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    /// Test statistic.
    pub statistic: f64,
    /// P-value in [0, 1].
    pub p_value: f64,
    /// Degrees of freedom or other test-specific parameter.
    pub df: f64,
}

/// Ljung-Box portmanteau test for autocorrelation up to `lags`.
///
/// Q = n (n+2) sum_{j=1..lags} rho(j)^2 / (n-j), compared against a
/// chi-square distribution with `lags` degrees of freedom.
pub fn ljung_box(residuals: &[f64], lags: usize) -> Result<TestResult> {
    let n = residuals.len();
    if lags < 1 || n <= lags {
        return Err(Error::Precondition(format!(
            "ljung_box needs length > lags >= 1, got n={n}, lags={lags}"
        )));
    }
    let rho = acf(residuals, lags)?;
    let nf = n as f64;
    let q: f64 = rho
        .iter()
        .enumerate()
        .map(|(idx, r)| r * r / (nf - (idx + 1) as f64))
        .sum::<f64>()
        * nf
        * (nf + 2.0);
    Ok(TestResult {
        statistic: q,
        p_value: chi_square_sf(q, lags as f64),
        df: lags as f64,
    })
}

/// Default Ljung-Box lag count for a series of length `n` with seasonal
/// period `frequency`: two seasonal cycles capped at n/4.
pub fn ljung_box_lags(n: usize, frequency: usize) -> usize {
    let cap = (n / 4).max(1);
    (2 * frequency.max(1)).min(24).min(cap).max(1)
}

/// Teräsvirta-style neural network test for neglected non-linearity.
///
/// Fits a linear AR(1) regression, then regresses its residuals on the lag
/// plus quadratic and cubic terms; the statistic is n R² of the auxiliary
/// regression with a chi-square(2) reference.
pub fn teraesvirta_stat(series: &[f64]) -> Result<TestResult> {
    let n = series.len();
    if n < 30 {
        return Err(Error::Precondition(format!(
            "teraesvirta_stat needs length >= 30, got {n}"
        )));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let sd = (series.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64).sqrt();
    if sd <= 0.0 {
        return Err(Error::DegenerateSeries(
            "constant series has no non-linearity to test".into(),
        ));
    }
    // Standardize so the cubic terms stay numerically tame.
    let z: Vec<f64> = series.iter().map(|v| (v - mean) / sd).collect();

    let m = n - 1;
    let lin_x: Vec<Vec<f64>> = (1..n).map(|t| vec![1.0, z[t - 1]]).collect();
    let y: Vec<f64> = (1..n).map(|t| z[t]).collect();
    let beta = linalg::least_squares(&lin_x, &y, 1e-8)?;
    let resid: Vec<f64> = lin_x
        .iter()
        .zip(y.iter())
        .map(|(row, &yi)| yi - (beta[0] + beta[1] * row[1]))
        .collect();

    let aux_x: Vec<Vec<f64>> = (1..n)
        .map(|t| {
            let l = z[t - 1];
            vec![1.0, l, l * l, l * l * l]
        })
        .collect();
    let gamma = linalg::least_squares(&aux_x, &resid, 1e-8)?;
    let r2 = linalg::r_squared(&aux_x, &resid, &gamma);
    let stat = m as f64 * r2;
    Ok(TestResult {
        statistic: stat,
        p_value: chi_square_sf(stat, 2.0),
        df: 2.0,
    })
}

/// Engle's ARCH Lagrange-multiplier test.
///
/// Regresses the squared demeaned series on its own `lags` lags;
/// statistic = n R² with chi-square(`lags`) reference. The R² doubles as the
/// heteroskedasticity feature value.
pub fn arch_lm_stat(series: &[f64], lags: usize) -> Result<(TestResult, f64)> {
    let n = series.len();
    if lags < 1 || n <= lags + 1 {
        return Err(Error::Precondition(format!(
            "arch_lm_stat needs length > lags + 1, got n={n}, lags={lags}"
        )));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let sq: Vec<f64> = series.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = sq.iter().sum::<f64>() / n as f64;
    if var <= 0.0 {
        return Err(Error::DegenerateSeries(
            "zero-variance series has no ARCH effect".into(),
        ));
    }
    // Scale squared values to unit mean for conditioning.
    let sq: Vec<f64> = sq.iter().map(|v| v / var).collect();
    let rows: Vec<Vec<f64>> = (lags..n)
        .map(|t| {
            let mut row = Vec::with_capacity(lags + 1);
            row.push(1.0);
            for j in 1..=lags {
                row.push(sq[t - j]);
            }
            row
        })
        .collect();
    let y: Vec<f64> = (lags..n).map(|t| sq[t]).collect();
    let beta = linalg::least_squares(&rows, &y, 1e-8)?;
    let r2 = linalg::r_squared(&rows, &y, &beta);
    let m = rows.len() as f64;
    let stat = m * r2;
    Ok((
        TestResult {
            statistic: stat,
            p_value: chi_square_sf(stat, lags as f64),
            df: lags as f64,
        },
        r2,
    ))
}

/// Shannon entropy of the normalized periodogram, scaled to [0, 1].
/// 1 means a flat (white-noise-like) spectrum, 0 a single spectral line.
pub fn spectral_entropy(series: &[f64]) -> Result<f64> {
    let n = series.len();
    if n < 16 {
        return Err(Error::Precondition(format!(
            "spectral_entropy needs length >= 16, got {n}"
        )));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = series.iter().map(|v| v - mean).collect();
    if centered.iter().map(|v| v * v).sum::<f64>() <= 0.0 {
        return Err(Error::DegenerateSeries(
            "constant series has no spectrum".into(),
        ));
    }
    let m = n / 2;
    let mut power = Vec::with_capacity(m);
    for k in 1..=m {
        let w = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for (t, &v) in centered.iter().enumerate() {
            let ang = w * t as f64;
            re += v * ang.cos();
            im -= v * ang.sin();
        }
        power.push(re * re + im * im);
    }
    let total: f64 = power.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateSeries("empty periodogram".into()));
    }
    let mut h = 0.0;
    for &p in &power {
        let q = p / total;
        if q > 0.0 {
            h -= q * q.ln();
        }
    }
    Ok(h / (m as f64).ln())
}

/// Lumpiness: variance of per-tile variances over non-overlapping tiles of
/// the standardized series. Returns 0 with a degenerate flag semantics for
/// constant input (the caller sees Ok(0.0)).
pub fn lumpiness(series: &[f64], tile: usize) -> Result<f64> {
    let n = series.len();
    if tile < 2 || n < 2 * tile {
        return Err(Error::Precondition(format!(
            "lumpiness needs at least 2 tiles of width >= 2, got n={n}, tile={tile}"
        )));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let sd = (series.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64).sqrt();
    if sd <= 0.0 {
        return Ok(0.0);
    }
    let z: Vec<f64> = series.iter().map(|v| (v - mean) / sd).collect();
    let tiles = n / tile;
    let mut tile_vars = Vec::with_capacity(tiles);
    for b in 0..tiles {
        let chunk = &z[b * tile..(b + 1) * tile];
        let m = chunk.iter().sum::<f64>() / tile as f64;
        tile_vars.push(chunk.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / tile as f64);
    }
    let tv_mean = tile_vars.iter().sum::<f64>() / tiles as f64;
    Ok(tile_vars
        .iter()
        .map(|v| (v - tv_mean) * (v - tv_mean))
        .sum::<f64>()
        / tiles as f64)
}

/// One-tail paired t-test with alternative mean(a - b) < 0.
pub fn paired_t_one_tail(a: &[f64], b: &[f64]) -> Result<TestResult> {
    let n = a.len();
    if n != b.len() || n < 2 {
        return Err(Error::Precondition(format!(
            "paired t-test needs equal lengths >= 2, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let diffs: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| x - y).collect();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1) as f64;
    if var <= 0.0 {
        return Err(Error::DegenerateSeries(
            "paired differences have zero variance".into(),
        ));
    }
    let se = (var / n as f64).sqrt();
    let t = mean / se;
    let df = (n - 1) as f64;
    Ok(TestResult {
        statistic: t,
        p_value: student_t_cdf(t, df),
        df,
    })
}
