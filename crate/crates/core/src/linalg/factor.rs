//! Cholesky factorization and symmetric positive definite solves.

use super::matrix::Matrix;
use super::LinalgError;

/// Lower-triangular Cholesky factor `L` with `L·Lᵀ = M`.
///
/// The input is symmetrized as `(M + Mᵀ)/2` before factoring. Fails with
/// [`LinalgError::NotPositiveDefinite`] on the first non-positive pivot,
/// which signals a rank-deficient or ill-posed input.
pub fn cholesky(m: &Matrix) -> Result<Matrix, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::DimensionMismatch {
            context: "cholesky requires a square matrix".into(),
        });
    }
    let a = m.symmetrized();
    let n = a.rows();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(LinalgError::NotPositiveDefinite { pivot: j });
        }
        let dj = d.sqrt();
        l[(j, j)] = dj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / dj;
        }
    }
    Ok(l)
}

/// Solve `M·X = B` for symmetric positive definite `M` via Cholesky.
pub fn solve_spd(m: &Matrix, b: &Matrix) -> Result<Matrix, LinalgError> {
    if m.rows() != b.rows() {
        return Err(LinalgError::DimensionMismatch {
            context: format!(
                "solve_spd: M is {0}x{0} but B has {1} rows",
                m.rows(),
                b.rows()
            ),
        });
    }
    let l = cholesky(m)?;
    let y = forward_substitute(&l, b);
    Ok(back_substitute_transposed(&l, &y))
}

/// Solve `M·x = b` for a single right-hand side.
pub fn solve_spd_vec(m: &Matrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let rhs = Matrix::from_fn(b.len(), 1, |i, _| b[i]);
    let x = solve_spd(m, &rhs)?;
    Ok(x.column(0))
}

/// Solve `L·X = B` for lower-triangular `L`.
pub fn forward_substitute(l: &Matrix, b: &Matrix) -> Matrix {
    let n = l.rows();
    let k = b.cols();
    let mut x = b.clone();
    for c in 0..k {
        for i in 0..n {
            let mut s = x[(i, c)];
            for j in 0..i {
                s -= l[(i, j)] * x[(j, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
    }
    x
}

/// Solve `Lᵀ·X = B` for lower-triangular `L`.
pub fn back_substitute_transposed(l: &Matrix, b: &Matrix) -> Matrix {
    let n = l.rows();
    let k = b.cols();
    let mut x = b.clone();
    for c in 0..k {
        for i in (0..n).rev() {
            let mut s = x[(i, c)];
            for j in (i + 1)..n {
                s -= l[(j, i)] * x[(j, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
    }
    x
}
