//! Multi-model significance testing: Friedman test over per-dataset ranks
//! and the Nemenyi critical distance for post-hoc comparison.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::diagnostics::TestResult;
use crate::stats::dist::chi_square_sf;

/// Ranks, omnibus test, and post-hoc pairwise outcomes for a set of models
/// compared across datasets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankComparison {
    pub model_names: Vec<String>,
    /// Mean rank per model (rank 1 = best, i.e. smallest error).
    pub mean_ranks: Vec<f64>,
    pub friedman: TestResult,
    /// Nemenyi critical distance at the requested alpha.
    pub nemenyi_cd: f64,
    /// pairwise[i][j] is true when models i and j differ significantly
    /// (|mean rank difference| > CD).
    pub pairwise_significant: Vec<Vec<bool>>,
}

/// Mid-ranks of one row, rank 1 for the smallest value.
pub(crate) fn mid_ranks(row: &[f64]) -> Vec<f64> {
    let k = row.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| row[a].partial_cmp(&row[b]).unwrap());
    let mut ranks = vec![0.0; k];
    let mut i = 0;
    while i < k {
        let mut j = i;
        while j + 1 < k && row[order[j + 1]] == row[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Friedman rank test over a datasets x models matrix (lower value = better).
///
/// Rows are ranked with mid-ranks for ties; the statistic is
/// chi2_F = 12N/(k(k+1)) * sum_j (Rbar_j - (k+1)/2)^2 with k-1 df.
pub fn friedman_test(values: &[Vec<f64>]) -> Result<(TestResult, Vec<f64>)> {
    let n = values.len();
    if n < 2 {
        return Err(Error::Precondition(format!(
            "friedman_test needs >= 2 datasets, got {n}"
        )));
    }
    let k = values[0].len();
    if k < 2 || values.iter().any(|row| row.len() != k) {
        return Err(Error::Precondition(
            "friedman_test needs >= 2 models and rectangular input".into(),
        ));
    }
    let mut rank_sums = vec![0.0; k];
    for row in values {
        for (j, r) in mid_ranks(row).iter().enumerate() {
            rank_sums[j] += r;
        }
    }
    let mean_ranks: Vec<f64> = rank_sums.iter().map(|s| s / n as f64).collect();
    let center = (k as f64 + 1.0) / 2.0;
    let stat = 12.0 * n as f64 / (k as f64 * (k as f64 + 1.0))
        * mean_ranks
            .iter()
            .map(|r| (r - center) * (r - center))
            .sum::<f64>();
    let df = (k - 1) as f64;
    Ok((
        TestResult {
            statistic: stat,
            p_value: chi_square_sf(stat, df),
            df,
        },
        mean_ranks,
    ))
}

// q_alpha constants for the Nemenyi test (studentized range at infinite
// df divided by sqrt 2), k = 2..=20.
const NEMENYI_Q_05: [f64; 19] = [
    1.959964, 2.343701, 2.569032, 2.727774, 2.849705, 2.948320, 3.030878, 3.101730, 3.163684,
    3.218654, 3.268004, 3.312739, 3.353618, 3.391230, 3.426041, 3.458425, 3.488685, 3.517073,
    3.543799,
];
const NEMENYI_Q_10: [f64; 19] = [
    1.644854, 2.052293, 2.291341, 2.459516, 2.588521, 2.692732, 2.779884, 2.854606, 2.919889,
    2.977768, 3.029694, 3.076733, 3.119693, 3.159199, 3.195743, 3.229723, 3.261461, 3.291224,
    3.319233,
];

/// Nemenyi critical distance CD = q_alpha sqrt(k(k+1)/(6N)).
pub fn nemenyi_cd(k: usize, n_datasets: usize, alpha: f64) -> Result<f64> {
    if k < 2 || n_datasets < 2 {
        return Err(Error::Precondition(format!(
            "nemenyi_cd needs k >= 2 and N >= 2, got k={k}, N={n_datasets}"
        )));
    }
    let table = if (alpha - 0.05).abs() < 1e-12 {
        &NEMENYI_Q_05
    } else if (alpha - 0.10).abs() < 1e-12 {
        &NEMENYI_Q_10
    } else {
        return Err(Error::Config(format!(
            "unsupported alpha {alpha}; supported levels: 0.05, 0.1"
        )));
    };
    if k - 2 >= table.len() {
        return Err(Error::Precondition(format!(
            "nemenyi_cd table covers k <= {}, got k={k}",
            table.len() + 1
        )));
    }
    let q = table[k - 2];
    Ok(q * ((k * (k + 1)) as f64 / (6.0 * n_datasets as f64)).sqrt())
}

/// Full rank comparison: Friedman omnibus plus Nemenyi pairwise matrix.
pub fn rank_comparison(
    model_names: &[String],
    values: &[Vec<f64>],
    alpha: f64,
) -> Result<RankComparison> {
    let (friedman, mean_ranks) = friedman_test(values)?;
    let k = mean_ranks.len();
    if model_names.len() != k {
        return Err(Error::Precondition(format!(
            "{} model names for {} columns",
            model_names.len(),
            k
        )));
    }
    let cd = nemenyi_cd(k, values.len(), alpha)?;
    let pairwise: Vec<Vec<bool>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| i != j && (mean_ranks[i] - mean_ranks[j]).abs() > cd)
                .collect()
        })
        .collect();
    Ok(RankComparison {
        model_names: model_names.to_vec(),
        mean_ranks,
        friedman,
        nemenyi_cd: cd,
        pairwise_significant: pairwise,
    })
}
