//! Dense helpers for the small symmetric systems that show up everywhere
//! (Gram matrices, path normal equations). Matrices are row-major `Vec<f64>`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative pivot threshold below which a factorization is declared singular.
const PIVOT_TOL: f64 = 1e-12;

/// Ridge added (times the trace) when the plain factorization fails.
pub(crate) const RIDGE: f64 = 1e-10;

/// Lower-triangular Cholesky factor (row-major) of a symmetric positive
/// definite matrix. Pivots below `PIVOT_TOL` times the largest diagonal
/// entry count as singular.
pub fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    let scale = (0..n).map(|i| a[i * n + i].abs()).fold(0.0, f64::max);
    if n > 0 && scale == 0.0 {
        return None;
    }
    let l = DMatrix::from_row_slice(n, n, a).cholesky()?.unpack();
    let stable = (0..n).all(|j| {
        let d = l[(j, j)] * l[(j, j)];
        d.is_finite() && d > PIVOT_TOL * scale
    });
    // the transpose's column-major storage is the row-major factor
    stable.then(|| l.transpose().as_slice().to_vec())
}

/// Solves `L L^T x = b` given the factor from [`cholesky`].
pub fn cholesky_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let l = DMatrix::from_row_slice(n, n, l);
    let mut x = DVector::from_column_slice(b);
    l.solve_lower_triangular_mut(&mut x);
    l.tr_solve_lower_triangular_mut(&mut x);
    x.as_slice().to_vec()
}

/// Solves a symmetric positive semidefinite system. If the matrix is
/// numerically singular, `RIDGE * trace` is added to the diagonal and the
/// factorization is retried once.
///
/// Returns the solution and whether the ridge was needed.
pub fn solve_psd(a: &[f64], n: usize, b: &[f64]) -> Result<(Vec<f64>, bool)> {
    if n == 0 {
        return Ok((Vec::new(), false));
    }
    if let Some(l) = cholesky(a, n) {
        return Ok((cholesky_solve(&l, n, b), false));
    }
    let trace: f64 = (0..n).map(|i| a[i * n + i]).sum();
    let ridge = RIDGE * if trace > 0.0 { trace } else { 1.0 };
    let mut reg = a.to_vec();
    for i in 0..n {
        reg[i * n + i] += ridge;
    }
    match cholesky(&reg, n) {
        Some(l) => Ok((cholesky_solve(&l, n, b), true)),
        None => Err(Error::NumericalFailure(format!(
            "{n}x{n} normal system is singular even after ridge {ridge:e}"
        ))),
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `A x` for a row-major `n x n` matrix.
pub fn mat_vec(a: &[f64], n: usize, x: &[f64]) -> Vec<f64> {
    (0..n).map(|i| dot(&a[i * n..(i + 1) * n], x)).collect()
}
