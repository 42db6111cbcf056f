//! Per-series feature vectors extracted from residual series, standardized
//! into a matrix for clustering.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats;

/// Feature identifiers, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Feature {
    Acf1,
    Acf10SumSq,
    Pacf5SumSq,
    Teraesvirta,
    ArchR2,
    SpectralEntropy,
    Lumpiness,
    TrendStrength,
    SeasonalStrength,
}

impl Feature {
    pub fn name(&self) -> &'static str {
        match self {
            Feature::Acf1 => "acf1",
            Feature::Acf10SumSq => "acf10_sum_sq",
            Feature::Pacf5SumSq => "pacf5_sum_sq",
            Feature::Teraesvirta => "teraesvirta_stat",
            Feature::ArchR2 => "arch_r2",
            Feature::SpectralEntropy => "spectral_entropy",
            Feature::Lumpiness => "lumpiness",
            Feature::TrendStrength => "trend_strength",
            Feature::SeasonalStrength => "seasonal_strength",
        }
    }
}

/// The default, full feature set.
pub const DEFAULT_FEATURES: [Feature; 9] = [
    Feature::Acf1,
    Feature::Acf10SumSq,
    Feature::Pacf5SumSq,
    Feature::Teraesvirta,
    Feature::ArchR2,
    Feature::SpectralEntropy,
    Feature::Lumpiness,
    Feature::TrendStrength,
    Feature::SeasonalStrength,
];

/// One series' feature values; entries are `None` where the feature could
/// not be computed (short series, degenerate input).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureVector {
    pub series_id: String,
    pub values: Vec<Option<f64>>,
    /// True when the residual series was degenerate and every feature is absent.
    pub degenerate: bool,
}

/// Standardized feature rows plus the stats needed to undo standardization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub feature_names: Vec<String>,
    pub series_ids: Vec<String>,
    /// Row-major standardized values; absent entries imputed to 0.
    pub rows: Vec<Vec<f64>>,
    pub col_means: Vec<f64>,
    pub col_stds: Vec<f64>,
    /// Columns that were constant (or all-absent) across rows.
    pub constant_cols: Vec<bool>,
}

/// Extract the configured features from one residual series.
///
/// Features that need more data than available are reported absent rather
/// than failing the whole vector; a fully degenerate residual yields an
/// all-absent vector with the degenerate flag set.
pub fn extract_features(
    series_id: &str,
    residual: &[f64],
    frequency: usize,
    features: &[Feature],
) -> Result<FeatureVector> {
    let n = residual.len();
    if n < 16 {
        return Err(Error::Precondition(format!(
            "feature extraction needs residual length >= 16, got {n}"
        )));
    }
    let mean = residual.iter().sum::<f64>() / n as f64;
    let var = residual.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    if var <= 0.0 {
        return Ok(FeatureVector {
            series_id: series_id.to_string(),
            values: vec![None; features.len()],
            degenerate: true,
        });
    }

    let acf10 = stats::acf(residual, 10.min(n - 1))?;
    let pacf5 = stats::pacf(residual, 5.min(n - 1))?;
    let decomposition = stats::strengths(residual, frequency).ok();

    let mut values = Vec::with_capacity(features.len());
    for f in features {
        let v = match f {
            Feature::Acf1 => Some(acf10[0]),
            Feature::Acf10SumSq => Some(acf10.iter().map(|r| r * r).sum()),
            Feature::Pacf5SumSq => Some(pacf5.iter().map(|p| p * p).sum()),
            Feature::Teraesvirta => stats::teraesvirta_stat(residual).ok().map(|t| t.statistic),
            Feature::ArchR2 => {
                let lags = 12.min(n.saturating_sub(2)).max(1);
                stats::arch_lm_stat(residual, lags).ok().map(|(_, r2)| r2)
            }
            Feature::SpectralEntropy => stats::spectral_entropy(residual).ok(),
            Feature::Lumpiness => {
                let tile = frequency.max(2);
                stats::lumpiness(residual, tile).ok()
            }
            Feature::TrendStrength => decomposition.as_ref().map(|d| d.trend_strength),
            Feature::SeasonalStrength => decomposition.as_ref().and_then(|d| d.seasonal_strength),
        };
        values.push(v.filter(|x| x.is_finite()));
    }
    Ok(FeatureVector {
        series_id: series_id.to_string(),
        values,
        degenerate: false,
    })
}

/// Column-standardize feature vectors into a matrix. Absent entries are
/// imputed with the column mean (0 after standardization); constant columns
/// become all-zero and are flagged.
pub fn build_matrix(vectors: &[FeatureVector], features: &[Feature]) -> Result<FeatureMatrix> {
    if vectors.is_empty() {
        return Err(Error::Precondition("no feature vectors to standardize".into()));
    }
    let m = features.len();
    let n = vectors.len();
    let mut col_means = vec![0.0; m];
    let mut col_stds = vec![0.0; m];
    let mut constant_cols = vec![false; m];

    for j in 0..m {
        let present: Vec<f64> = vectors.iter().filter_map(|v| v.values[j]).collect();
        if present.is_empty() {
            constant_cols[j] = true;
            col_means[j] = 0.0;
            col_stds[j] = 1.0;
            continue;
        }
        let mean = present.iter().sum::<f64>() / present.len() as f64;
        let var = present.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / present.len() as f64;
        let std = var.sqrt();
        col_means[j] = mean;
        if std < 1e-12 || n == 1 {
            // Single-row standardization maps to zero by convention.
            constant_cols[j] = std < 1e-12;
            col_stds[j] = 1.0;
        } else {
            col_stds[j] = std;
        }
    }

    let rows: Vec<Vec<f64>> = vectors
        .iter()
        .map(|v| {
            (0..m)
                .map(|j| match v.values[j] {
                    Some(x) if !constant_cols[j] && n > 1 => (x - col_means[j]) / col_stds[j],
                    _ => 0.0,
                })
                .collect()
        })
        .collect();

    Ok(FeatureMatrix {
        feature_names: features.iter().map(|f| f.name().to_string()).collect(),
        series_ids: vectors.iter().map(|v| v.series_id.clone()).collect(),
        rows,
        col_means,
        col_stds,
        constant_cols,
    })
}

impl FeatureMatrix {
    /// Undo standardization for one entry.
    pub fn destandardise(&self, row: usize, col: usize) -> f64 {
        self.rows[row][col] * self.col_stds[col] + self.col_means[col]
    }

    /// Render the matrix as CSV (raw, destandardised feature values).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("series_id");
        for name in &self.feature_names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (i, id) in self.series_ids.iter().enumerate() {
            out.push_str(id);
            for j in 0..self.feature_names.len() {
                out.push_str(&format!(",{:.6}", self.destandardise(i, j)));
            }
            out.push('\n');
        }
        out
    }
}
