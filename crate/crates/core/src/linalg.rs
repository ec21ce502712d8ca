//! Dense linear solves for the small per-node exposed-class systems.
//!
//! The matrices here are N_u-by-N_u with N_u rarely above 5, so a plain LU
//! factorisation with partial pivoting is all that is needed.

use crate::error::{Error, Result};

/// Relative pivot threshold below which a matrix is declared singular.
const PIVOT_RTOL: f64 = 1e-13;

/// Solve `A x = b` for square row-major `A` by LU with partial pivoting.
///
/// Fails with [`Error::SingularMatrix`] when a pivot falls below
/// `1e-13` times the largest absolute entry of `A`.
pub fn lu_solve(n: usize, a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    assert_eq!(a.len(), n * n, "matrix shape mismatch");
    assert_eq!(b.len(), n, "rhs length mismatch");
    if n == 0 {
        return Ok(Vec::new());
    }

    let scale = a.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    if scale == 0.0 {
        return Err(Error::SingularMatrix("all-zero matrix".into()));
    }
    let threshold = PIVOT_RTOL * scale;

    let mut lu = a.to_vec();
    let mut x = b.to_vec();

    for col in 0..n {
        // Pivot search in the current column.
        let mut pivot_row = col;
        let mut pivot_val = lu[col * n + col].abs();
        for row in col + 1..n {
            let v = lu[row * n + col].abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = row;
            }
        }
        if pivot_val < threshold {
            return Err(Error::SingularMatrix(format!(
                "pivot {pivot_val:.3e} below {threshold:.3e} in column {col}"
            )));
        }
        if pivot_row != col {
            for j in 0..n {
                lu.swap(col * n + j, pivot_row * n + j);
            }
            x.swap(col, pivot_row);
        }
        // Eliminate below the pivot, updating the rhs in lockstep.
        let inv_pivot = 1.0 / lu[col * n + col];
        for row in col + 1..n {
            let factor = lu[row * n + col] * inv_pivot;
            if factor != 0.0 {
                for j in col + 1..n {
                    lu[row * n + j] -= factor * lu[col * n + j];
                }
                x[row] -= factor * x[col];
            }
            lu[row * n + col] = 0.0;
        }
    }

    // Back substitution.
    for row in (0..n).rev() {
        let mut acc = x[row];
        for j in row + 1..n {
            acc -= lu[row * n + j] * x[j];
        }
        x[row] = acc / lu[row * n + row];
    }
    Ok(x)
}

/// Transpose a square row-major matrix.
pub fn transpose(n: usize, a: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = a[i * n + j];
        }
    }
    out
}

/// `y = A x` for square row-major `A`.
pub fn mat_vec(n: usize, a: &[f64], x: &[f64], y: &mut [f64]) {
    for i in 0..n {
        let row = &a[i * n..(i + 1) * n];
        y[i] = row.iter().zip(x).map(|(aij, xj)| aij * xj).sum();
    }
}
