//! Symmetric and symmetric-definite generalized eigensolvers.

use super::factor::{back_substitute_transposed, cholesky, forward_substitute};
use super::matrix::{dot, Matrix};
use super::LinalgError;

/// Iteration cap for the cyclic Jacobi sweeps.
const MAX_SWEEPS: usize = 100;

/// Full spectrum of a real symmetric matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct SymEigResult {
    /// Eigenvalues, sorted descending.
    pub values: Vec<f64>,
    /// Unit-norm eigenvectors as columns, same order as `values`.
    pub vectors: Matrix,
}

/// Solution of the pencil `A·u = λ·B·u` for symmetric `A` and SPD `B`.
#[derive(Debug, Clone)]
pub struct GenEigResult {
    /// Generalized eigenvalues, sorted descending.
    pub values: Vec<f64>,
    /// B-normalized eigenvectors as columns (`u_iᵀ·B·u_i = 1`).
    pub vectors: Matrix,
    /// Relative ridge that was added to `B` before factoring.
    pub ridge_used: f64,
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// The input is symmetrized as `(M + Mᵀ)/2` first. Fails with
/// [`LinalgError::NoConvergence`] if the off-diagonal mass has not vanished
/// after 100 sweeps.
pub fn sym_eig(m: &Matrix) -> Result<SymEigResult, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::DimensionMismatch {
            context: "sym_eig requires a square matrix".into(),
        });
    }
    let mut a = m.symmetrized();
    let n = a.rows();
    let mut v = Matrix::identity(n);
    let scale = a.frob_norm().max(f64::MIN_POSITIVE);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = off_diagonal_norm(&a);
        if off <= 1e-14 * scale {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                rotate(&mut a, &mut v, p, q, c, s);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > 1e-14 * scale {
        return Err(LinalgError::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n).map(|i| (a[(i, i)], v.column(i))).collect();
    pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
    let values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (j, (_, col)) in pairs.iter().enumerate() {
        vectors.set_column(j, col);
    }
    fix_column_signs(&mut vectors);
    Ok(SymEigResult { values, vectors })
}

/// Solve `A·u = λ·B·u` by Cholesky reduction of the SPD matrix `B`.
///
/// `B` is symmetrized and, when `ridge > 0`, shifted by
/// `ridge·(trace(B)/dim)·I` before factoring. The pencil is reduced to a
/// standard symmetric problem on `L⁻¹·A·L⁻ᵀ` and the eigenvectors are
/// back-transformed and B-normalized.
pub fn gen_sym_eig(a: &Matrix, b: &Matrix, ridge: f64) -> Result<GenEigResult, LinalgError> {
    if !a.is_square() || !b.is_square() || a.rows() != b.rows() {
        return Err(LinalgError::DimensionMismatch {
            context: format!(
                "gen_sym_eig: A is {}x{}, B is {}x{}",
                a.rows(),
                a.cols(),
                b.rows(),
                b.cols()
            ),
        });
    }
    let n = b.rows();
    let a_sym = a.symmetrized();
    let mut b_eff = b.symmetrized();
    if ridge > 0.0 {
        let shift = ridge * (b_eff.trace() / n as f64);
        for i in 0..n {
            b_eff[(i, i)] += shift;
        }
    }
    let l = cholesky(&b_eff)?;

    // C = L⁻¹ A L⁻ᵀ, via two triangular solves.
    let x = forward_substitute(&l, &a_sym);
    let c = forward_substitute(&l, &x.transpose())
        .transpose()
        .symmetrized();
    let inner = sym_eig(&c)?;

    // Back-transform u_i = L⁻ᵀ y_i; y unit implies uᵀ B_eff u = 1 already,
    // renormalize to absorb rounding.
    let mut vectors = back_substitute_transposed(&l, &inner.vectors);
    for j in 0..n {
        let u = vectors.column(j);
        let bu = b_eff.mul_vec(&u);
        let nb = dot(&u, &bu).sqrt();
        if nb > 0.0 {
            let scaled: Vec<f64> = u.iter().map(|x| x / nb).collect();
            vectors.set_column(j, &scaled);
        }
    }
    fix_column_signs(&mut vectors);
    Ok(GenEigResult {
        values: inner.values,
        vectors,
        ridge_used: ridge,
    })
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let n = a.rows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Deterministic sign convention: the largest-magnitude entry of each column
/// is made positive (first such index wins on ties).
pub(crate) fn fix_column_signs(m: &mut Matrix) {
    for j in 0..m.cols() {
        let mut best = 0usize;
        let mut best_abs = 0.0f64;
        for i in 0..m.rows() {
            let a = m[(i, j)].abs();
            if a > best_abs {
                best_abs = a;
                best = i;
            }
        }
        if m[(best, j)] < 0.0 {
            for i in 0..m.rows() {
                m[(i, j)] = -m[(i, j)];
            }
        }
    }
}
