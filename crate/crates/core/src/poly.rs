//! Polynomial root utilities for AR/MA stationarity and invertibility checks.
//!
//! An AR or MA lag polynomial `1 - c_1 z - ... - c_p z^p` is stable when all
//! of its roots lie strictly outside the unit circle.

/// Smallest root modulus of `1 - c[0] z - c[1] z^2 - ... - c[p-1] z^p`.
/// Returns `f64::INFINITY` when all coefficients are (effectively) zero.
pub fn min_root_modulus(coeffs: &[f64]) -> f64 {
    // Trim trailing zero coefficients: they do not add roots.
    let mut degree = coeffs.len();
    while degree > 0 && coeffs[degree - 1].abs() < 1e-300 {
        degree -= 1;
    }
    if degree == 0 {
        return f64::INFINITY;
    }
    // Durand-Kerner on the monic form of p(z) = 1 - c_1 z - ... - c_p z^p.
    let mut poly = vec![0.0; degree + 1];
    poly[0] = 1.0;
    for (k, &c) in coeffs.iter().take(degree).enumerate() {
        poly[k + 1] = -c;
    }
    let lead = poly[degree];
    let a: Vec<(f64, f64)> = poly.iter().map(|&c| (c / lead, 0.0)).collect();

    let eval = |z: (f64, f64)| -> (f64, f64) {
        let mut acc = (0.0, 0.0);
        for k in (0..=degree).rev() {
            acc = c_add(c_mul(acc, z), a[k]);
        }
        acc
    };

    // Initial guesses on a circle of radius slightly above 1.
    let mut roots: Vec<(f64, f64)> = (0..degree)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / degree as f64;
            (1.3 * ang.cos(), 1.3 * ang.sin())
        })
        .collect();

    for _ in 0..200 {
        let mut moved = 0.0_f64;
        for i in 0..degree {
            let zi = roots[i];
            let mut denom = (1.0, 0.0);
            for (j, &zj) in roots.iter().enumerate() {
                if j != i {
                    denom = c_mul(denom, c_sub(zi, zj));
                }
            }
            let dmag = denom.0 * denom.0 + denom.1 * denom.1;
            if dmag < 1e-300 {
                continue;
            }
            let step = c_div(eval(zi), denom);
            roots[i] = c_sub(zi, step);
            moved = moved.max((step.0 * step.0 + step.1 * step.1).sqrt());
        }
        if moved < 1e-13 {
            break;
        }
    }
    roots
        .iter()
        .map(|&(re, im)| (re * re + im * im).sqrt())
        .fold(f64::INFINITY, f64::min)
}

/// True when the lag polynomial keeps every root at modulus `> 1 + margin`.
pub fn is_stable(coeffs: &[f64], margin: f64) -> bool {
    min_root_modulus(coeffs) > 1.0 + margin
}

fn c_add(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 + b.0, a.1 + b.1)
}
fn c_sub(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 - b.0, a.1 - b.1)
}
fn c_mul(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}
fn c_div(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let d = b.0 * b.0 + b.1 * b.1;
    ((a.0 * b.0 + a.1 * b.1) / d, (a.1 * b.0 - a.0 * b.1) / d)
}
