//! Tridiagonal solve by Gaussian elimination with partial pivoting.
//!
//! The operators assembled for the third-harmonic correction are indefinite,
//! so the plain Thomas recurrence is not safe there.

/// Solves `A x = rhs` where `A` has sub-diagonal `lower` (length n-1),
/// diagonal `diag` (n) and super-diagonal `upper` (n-1). Returns `None` when a
/// pivot falls below `pivot_tol` times the largest matrix entry.
pub fn solve(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64], pivot_tol: f64) -> Option<Vec<f64>> {
    let n = diag.len();
    assert!(n >= 1 && lower.len() + 1 == n && upper.len() + 1 == n && rhs.len() == n);

    let scale = diag
        .iter()
        .chain(lower)
        .chain(upper)
        .fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    let tiny = pivot_tol * scale;

    // row i holds (d[i], u1[i], u2[i]) in columns i, i+1, i+2 after elimination
    let mut d = diag.to_vec();
    let mut u1: Vec<f64> = upper.iter().copied().chain(std::iter::once(0.0)).collect();
    let mut u2 = vec![0.0; n];
    let mut l: Vec<f64> = lower.to_vec();
    let mut b = rhs.to_vec();

    for i in 0..n - 1 {
        if l[i].abs() > d[i].abs() {
            // swap rows i and i+1
            std::mem::swap(&mut d[i], &mut l[i]);
            let next_u1 = if i + 1 < n - 1 { u1[i + 1] } else { 0.0 };
            let (a, c) = (u1[i], d[i + 1]);
            u1[i] = c;
            d[i + 1] = a;
            u2[i] = next_u1;
            if i + 1 < n - 1 {
                u1[i + 1] = 0.0;
            }
            b.swap(i, i + 1);
            // row i is now the old row i+1; row i+1 is the old row i
            if d[i].abs() <= tiny {
                return None;
            }
            let m = l[i] / d[i];
            d[i + 1] -= m * u1[i];
            if i + 1 < n - 1 {
                u1[i + 1] -= m * u2[i];
            }
            b[i + 1] -= m * b[i];
        } else {
            if d[i].abs() <= tiny {
                return None;
            }
            let m = l[i] / d[i];
            d[i + 1] -= m * u1[i];
            b[i + 1] -= m * b[i];
        }
        l[i] = 0.0;
    }
    if d[n - 1].abs() <= tiny {
        return None;
    }

    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        if i + 1 < n {
            s -= u1[i] * x[i + 1];
        }
        if i + 2 < n {
            s -= u2[i] * x[i + 2];
        }
        x[i] = s / d[i];
    }
    Some(x)
}

/// `y = A x` for the same storage layout as [`solve`].
pub fn matvec(lower: &[f64], diag: &[f64], upper: &[f64], x: &[f64]) -> Vec<f64> {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let mut s = diag[i] * x[i];
            if i > 0 {
                s += lower[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += upper[i] * x[i + 1];
            }
            s
        })
        .collect()
}
