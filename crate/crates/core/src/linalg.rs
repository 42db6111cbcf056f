//! Small dense linear algebra helpers: normal-equation least squares with
//! optional ridge, and a pivoting Gaussian solver.

use crate::error::{Error, Result};

/// Solve `A x = b` for symmetric positive (semi-)definite `A` stored row-major,
/// using Gaussian elimination with partial pivoting. A pivot below `tol`
/// signals rank deficiency; the offending column indices are reported.
pub fn solve(a: &[f64], b: &[f64], n: usize, tol: f64) -> Result<Vec<f64>> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    let mut m = a.to_vec();
    let mut rhs = b.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut bad_cols = Vec::new();

    for col in 0..n {
        let mut piv = col;
        let mut best = m[perm[col] * n + col].abs();
        for (r, &pr) in perm.iter().enumerate().skip(col + 1) {
            let v = m[pr * n + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best < tol {
            bad_cols.push(col);
            continue;
        }
        perm.swap(col, piv);
        let prow = perm[col];
        let pval = m[prow * n + col];
        for &r in perm.iter().skip(col + 1) {
            let factor = m[r * n + col] / pval;
            if factor == 0.0 {
                continue;
            }
            for c in col..n {
                m[r * n + c] -= factor * m[prow * n + c];
            }
            rhs[r] -= factor * rhs[prow];
        }
    }
    if !bad_cols.is_empty() {
        return Err(Error::Singular { columns: bad_cols });
    }

    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let row = perm[col];
        let mut v = rhs[row];
        for c in (col + 1)..n {
            v -= m[row * n + c] * x[c];
        }
        x[col] = v / m[row * n + col];
    }
    Ok(x)
}

/// Ordinary least squares via the normal equations: returns coefficients for
/// `y ~ X`, with `ridge` added to the diagonal (0 for plain OLS).
///
/// `rows` iterates the design matrix one observation at a time, so callers can
/// stream windows without materialising X.
pub fn least_squares(x: &[Vec<f64>], y: &[f64], ridge: f64) -> Result<Vec<f64>> {
    let n = x.len();
    if n == 0 || n != y.len() {
        return Err(Error::Precondition(format!(
            "least squares needs matching nonempty rows, got {} x rows and {} y values",
            n,
            y.len()
        )));
    }
    let p = x[0].len();
    let mut xtx = vec![0.0; p * p];
    let mut xty = vec![0.0; p];
    for (row, &yi) in x.iter().zip(y.iter()) {
        debug_assert_eq!(row.len(), p);
        for i in 0..p {
            xty[i] += row[i] * yi;
            for j in i..p {
                xtx[i * p + j] += row[i] * row[j];
            }
        }
    }
    for i in 0..p {
        for j in 0..i {
            xtx[i * p + j] = xtx[j * p + i];
        }
        xtx[i * p + i] += ridge;
    }
    // Pivot tolerance scaled to the magnitude of the Gram matrix.
    let scale = (0..p).map(|i| xtx[i * p + i].abs()).fold(0.0_f64, f64::max);
    let tol = (scale.max(1.0)) * 1e-12;
    solve(&xtx, &xty, p, tol)
}

/// R-squared of an OLS fit: 1 - SSR/SST with SST about the mean of `y`.
/// Returns 0 when `y` has no variance.
pub fn r_squared(x: &[Vec<f64>], y: &[f64], coeffs: &[f64]) -> f64 {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let sst: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    if sst <= 0.0 {
        return 0.0;
    }
    let ssr: f64 = x
        .iter()
        .zip(y.iter())
        .map(|(row, &yi)| {
            let fit: f64 = row.iter().zip(coeffs.iter()).map(|(a, b)| a * b).sum();
            (yi - fit) * (yi - fit)
        })
        .sum();
    (1.0 - ssr / sst).clamp(0.0, 1.0)
}
