//! Dense real linear algebra kernel: Cholesky factorization, symmetric and
//! symmetric-definite generalized eigensolvers, rank-revealing
//! orthonormalization, and subspace comparison.
//!
//! Everything here is a pure function over immutable [`Matrix`] values and is
//! safe to call from multiple threads. The routines are plain O(n³) dense
//! algorithms, intended for matrices up to a few hundred rows.

mod eig;
mod factor;
mod matrix;
mod svd;

pub use eig::{gen_sym_eig, sym_eig, GenEigResult, SymEigResult};
pub use factor::{cholesky, solve_spd, solve_spd_vec};
pub use matrix::{dot, norm, Matrix};
pub use svd::{orthonormal_basis, principal_angles, svd, Svd};

use thiserror::Error;

/// Errors from the linear algebra kernel.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    /// A pivot of the Cholesky factorization was not positive; the matrix is
    /// rank deficient or indefinite.
    #[error("matrix is not positive definite (pivot {pivot} is not positive)")]
    NotPositiveDefinite { pivot: usize },
    /// An iterative eigensolver exhausted its sweep budget.
    #[error("eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    /// Operand shapes are incompatible.
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },
    /// The input spans nothing (no columns or all columns zero).
    #[error("input has no numerical column span")]
    EmptyInput,
}
