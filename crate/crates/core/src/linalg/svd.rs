//! One-sided Jacobi SVD, rank-revealing orthonormalization, and principal
//! angles between subspaces.

use super::eig::fix_column_signs;
use super::matrix::{dot, Matrix};
use super::LinalgError;

const MAX_SWEEPS: usize = 100;

/// Thin singular value decomposition `A = U·diag(σ)·Vᵀ`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// Left singular vectors, one column per singular value.
    pub u: Matrix,
    /// Singular values, descending. Zero singular values leave a zero column in `u`.
    pub values: Vec<f64>,
    /// Right singular vectors, one column per singular value.
    pub v: Matrix,
}

/// Singular value decomposition by one-sided Jacobi rotations.
pub fn svd(m: &Matrix) -> Result<Svd, LinalgError> {
    if m.rows() < m.cols() {
        let t = svd(&m.transpose())?;
        return Ok(Svd {
            u: t.v,
            values: t.values,
            v: t.u,
        });
    }

    let n = m.cols();
    let mut w = m.clone();
    let mut v = Matrix::identity(n);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let wp = w.column(p);
                let wq = w.column(q);
                let alpha = dot(&wp, &wp);
                let beta = dot(&wq, &wq);
                let gamma = dot(&wp, &wq);
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    1.0 / (zeta - (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..w.rows() {
                    let a = w[(i, p)];
                    let b = w[(i, q)];
                    w[(i, p)] = c * a - s * b;
                    w[(i, q)] = s * a + c * b;
                }
                for i in 0..n {
                    let a = v[(i, p)];
                    let b = v[(i, q)];
                    v[(i, p)] = c * a - s * b;
                    v[(i, q)] = s * a + c * b;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(LinalgError::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n)
        .map(|j| {
            let col = w.column(j);
            dot(&col, &col).sqrt()
        })
        .collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap());

    let mut u = Matrix::zeros(m.rows(), n);
    let mut values = Vec::with_capacity(n);
    let mut v_sorted = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let sigma = norms[src];
        values.push(sigma);
        if sigma > 0.0 {
            let col: Vec<f64> = w.column(src).iter().map(|x| x / sigma).collect();
            u.set_column(dst, &col);
        }
        v_sorted.set_column(dst, &v.column(src));
    }
    Ok(Svd {
        u,
        values,
        v: v_sorted,
    })
}

/// Orthonormal basis for the numerical column span of the input.
///
/// Keeps the singular directions with `σ ≥ rel_tol·σ_max` and returns the
/// basis together with that numerical rank. `rel_tol` must lie in (0, 1).
/// Fails with [`LinalgError::EmptyInput`] when the input has no numerical
/// span at all (every column zero).
pub fn orthonormal_basis(columns: &Matrix, rel_tol: f64) -> Result<(Matrix, usize), LinalgError> {
    assert!(rel_tol > 0.0 && rel_tol < 1.0, "rel_tol must lie in (0, 1)");
    let decomp = svd(columns)?;
    let sigma_max = decomp.values[0];
    if sigma_max <= 0.0 {
        return Err(LinalgError::EmptyInput);
    }
    let rank = decomp
        .values
        .iter()
        .take_while(|&&s| s >= rel_tol * sigma_max)
        .count();
    let mut basis = decomp.u.columns(0, rank);
    fix_column_signs(&mut basis);
    Ok((basis, rank))
}

/// Principal angles between the column spans of two orthonormal bases,
/// in radians, ascending.
///
/// The angles are `arccos` of the clamped singular values of `UᵀV`. Angles
/// below 45° are recovered through the sine of the residual `V − U(UᵀV)`
/// instead, since `arccos` near 1 cannot resolve anything under ~1e-8.
pub fn principal_angles(u: &Matrix, v: &Matrix) -> Result<Vec<f64>, LinalgError> {
    if u.rows() != v.rows() {
        return Err(LinalgError::DimensionMismatch {
            context: format!(
                "principal_angles: bases live in R^{} and R^{}",
                u.rows(),
                v.rows()
            ),
        });
    }
    let m = u.transpose().mul(v);
    let cosines = svd(&m)?.values;
    let residual = v.sub(&u.mul(&m));
    let sines = svd(&residual)?.values;
    let k = u.cols().min(v.cols());
    let q = sines.len();
    let mut angles = Vec::with_capacity(k);
    for i in 0..k {
        let c = cosines[i].clamp(0.0, 1.0);
        // sines are descending, so the i-th smallest angle pairs with the
        // (q-1-i)-th sine
        let s = sines[q - 1 - i].clamp(0.0, 1.0);
        angles.push(if c * c < 0.5 { c.acos() } else { s.asin() });
    }
    Ok(angles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::test_support::{random_matrix, random_orthonormal};
    use std::f64::consts::FRAC_PI_2;

    fn unit(n: usize, i: usize) -> Vec<f64> {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        e
    }

    #[test]
    fn svd_reconstructs_random_matrix() {
        let a = random_matrix(9, 5, 17);
        let d = svd(&a).unwrap();
        let mut sigma = Matrix::zeros(5, 5);
        for i in 0..5 {
            sigma[(i, i)] = d.values[i];
        }
        let rec = d.u.mul(&sigma).mul(&d.v.transpose());
        assert!(rec.sub(&a).frob_norm() <= 1e-12 * a.frob_norm());
        let utu = d.u.transpose().mul(&d.u);
        assert!(utu.sub(&Matrix::identity(5)).max_abs() < 1e-12);
    }

    #[test]
    fn basis_merges_duplicate_columns() {
        let mut m = Matrix::zeros(4, 3);
        m.set_column(0, &unit(4, 0));
        m.set_column(1, &unit(4, 0));
        m.set_column(2, &unit(4, 1));
        let (basis, rank) = orthonormal_basis(&m, 1e-8).unwrap();
        assert_eq!(rank, 2);
        // span must contain e1 and e2
        let angles = principal_angles(
            &basis,
            &Matrix::from_rows(vec![
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![0.0, 0.0],
                vec![0.0, 0.0],
            ]),
        )
        .unwrap();
        assert!(angles.iter().all(|a| a.abs() < 1e-10));
    }

    #[test]
    fn basis_drops_columns_below_tolerance() {
        let mut m = Matrix::zeros(3, 2);
        m.set_column(0, &unit(3, 0));
        m.set_column(1, &[0.0, 1e-12, 0.0]);
        let (_, rank) = orthonormal_basis(&m, 1e-8).unwrap();
        assert_eq!(rank, 1);
    }

    #[test]
    fn basis_of_zero_matrix_is_empty_input() {
        let m = Matrix::zeros(3, 2);
        assert!(matches!(
            orthonormal_basis(&m, 1e-8),
            Err(LinalgError::EmptyInput)
        ));
    }

    #[test]
    fn basis_recovers_known_rank_three_construction() {
        // N x 4 built from 3 independent factors: rank must be 3 and the
        // basis must span the same space as the factors.
        let f = random_matrix(8, 3, 23);
        let mix = Matrix::from_rows(vec![
            vec![1.0, 0.0, 0.0, 0.5],
            vec![0.0, 1.0, 0.0, -1.0],
            vec![0.0, 0.0, 1.0, 2.0],
        ]);
        let m = f.mul(&mix);
        let (basis, rank) = orthonormal_basis(&m, 1e-8).unwrap();
        assert_eq!(rank, 3);
        let (f_basis, _) = orthonormal_basis(&f, 1e-8).unwrap();
        let angles = principal_angles(&basis, &f_basis).unwrap();
        assert!(angles.iter().all(|a| a.abs() < 1e-8));
    }

    #[test]
    fn identical_subspaces_have_zero_angles() {
        let u = Matrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]]);
        let angles = principal_angles(&u, &u).unwrap();
        assert_eq!(angles.len(), 2);
        assert!(angles.iter().all(|a| a.abs() < 1e-12));
    }

    #[test]
    fn half_overlapping_subspaces() {
        let u = Matrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]]);
        let v = Matrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 0.0], vec![0.0, 1.0]]);
        let angles = principal_angles(&u, &v).unwrap();
        assert!(angles[0].abs() < 1e-12);
        assert!((angles[1] - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn angles_match_projector_oracle_on_random_subspaces() {
        // cos²θ_i are the nonzero eigenvalues of P_U·P_V·P_U.
        let u = random_orthonormal(25, 3, 31);
        let v = random_orthonormal(25, 3, 37);
        let angles = principal_angles(&u, &v).unwrap();

        let pu = u.mul(&u.transpose());
        let pv = v.mul(&v.transpose());
        let prod = pu.mul(&pv).mul(&pu).symmetrized();
        let eig = crate::linalg::sym_eig(&prod).unwrap();
        for (i, angle) in angles.iter().enumerate() {
            let cos2 = eig.values[i].clamp(0.0, 1.0);
            assert!((angle.cos().powi(2) - cos2).abs() < 1e-8);
        }
    }

    #[test]
    fn mismatched_row_counts_rejected() {
        let u = Matrix::identity(3);
        let v = Matrix::identity(4);
        assert!(matches!(
            principal_angles(&u, &v),
            Err(LinalgError::DimensionMismatch { .. })
        ));
    }
}
