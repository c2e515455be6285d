//! Dynamical component analysis: fit the generalized eigenproblem on a
//! correlation triple, classify the dynamics by the eigenvalue spectrum,
//! build the projection subspace, and project signals onto it.
//!
//! The fitted eigenvalue `λ_i` is the fraction of the derivative variance in
//! direction `u_i` explained by the best linear readout of the signal itself;
//! the residual cost at the optimum is `1 − λ_i`. Eigenvalues near one mark
//! directions whose dynamics close linearly.

use crate::linalg::{
    dot, gen_sym_eig, orthonormal_basis, solve_spd, solve_spd_vec, LinalgError, Matrix,
};
use crate::signal::{
    central_difference, correlation_triple, windows, CorrelationTriple, SignalError, TimeSeries,
    WindowSpec,
};
use thiserror::Error;

/// Default eigenvalue threshold for keeping a component.
pub const DEFAULT_THRESHOLD: f64 = 0.95;
/// Default relative tolerance for the rank decision of the combined span.
///
/// On finite noisy data the v-partners carry a noise-driven component of a
/// few percent to a few tens of percent of the leading singular value, so the
/// rank decision needs a coarse cut; directions that genuinely extend the
/// span sit well above it. Synthetic exact constructions should pass a tight
/// tolerance such as 1e-8 instead.
pub const DEFAULT_RANK_TOL: f64 = 0.25;
/// Relative ridge escalation ladder tried on factorization failure.
pub const RIDGE_LADDER: [f64; 3] = [0.0, 1e-10, 1e-8];

/// Errors from fitting and projecting.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DycaError {
    /// The correlation matrices stay non-definite even at the maximal ridge;
    /// the data is degenerate (for example a noiseless rank-deficient
    /// embedding).
    #[error("correlation matrices are singular even after ridge escalation")]
    Singular,
    /// No eigenvalue clears the threshold; the partly-linear model is not
    /// supported by the data.
    #[error("no eigenvalue reaches threshold {threshold} (largest is {largest})")]
    NoComponents { threshold: f64, largest: f64 },
    /// The derivative energy in direction `u` is not positive.
    #[error("derivative variance along u is not positive")]
    DegenerateU,
    /// The v-vectors are collinear in the `c0` metric.
    #[error("gram matrix of the v-set is singular")]
    SingularGram,
    /// Operand shapes do not line up.
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },
}

/// Ridge strategy for [`fit`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum RidgePolicy {
    /// Try a ridge of zero, then escalate through [`RIDGE_LADDER`].
    #[default]
    Auto,
    /// Use exactly the given relative ridge.
    Fixed(f64),
}

/// Options shared by [`fit`] and [`dyca_windows`].
#[derive(Debug, Clone, Copy, Default)]
pub struct FitOptions {
    pub ridge: RidgePolicy,
}

/// Sorted generalized eigenvalues with their eigenvectors.
#[derive(Debug, Clone)]
pub struct DycaSpectrum {
    /// Generalized eigenvalues, descending. For a self-consistent triple they
    /// lie in [0, 1] up to rounding; values above `1 + 1e-6` indicate an
    /// inconsistent triple and deserve a warning.
    pub values: Vec<f64>,
    /// Eigenvectors `u_i` as columns, `c2`-normalized, deterministic signs.
    pub vectors: Matrix,
    /// Relative ridge that was needed, zero when the data regularized itself.
    pub ridge_used: f64,
}

impl DycaSpectrum {
    /// Count of eigenvalues at or above `threshold`.
    pub fn count_above(&self, threshold: f64) -> usize {
        self.values.iter().filter(|&&v| v >= threshold).count()
    }
}

/// Orthonormal basis of the recovered dynamical subspace.
#[derive(Debug, Clone)]
pub struct DycaProjection {
    /// Number of eigenvectors at or above the threshold.
    pub m: usize,
    /// Rank of the combined span of eigenvectors and their v-partners.
    pub n: usize,
    /// Orthonormal channels × n basis of that span.
    pub basis: Matrix,
    /// Threshold that selected the components.
    pub threshold: f64,
    /// The retained eigenvectors, one column each.
    pub u_part: Matrix,
    /// The paired vectors `v_i = c0⁻¹·c1ᵀ·u_i`, one column each.
    pub v_part: Matrix,
}

/// Amplitude series obtained by projecting a signal onto a basis.
#[derive(Debug, Clone)]
pub struct DycaAmplitudes {
    pub series: TimeSeries,
    /// Window the projection basis was fitted on, if any.
    pub source_window: Option<usize>,
}

/// A cost-function evaluation point: one projection vector `u`, a set of
/// readout vectors, and their coefficients.
#[derive(Debug, Clone)]
pub struct CostPoint {
    pub u: Vec<f64>,
    pub v_set: Vec<Vec<f64>>,
    pub a: Vec<f64>,
}

/// Per-window fit outcome; failed windows carry the error instead of
/// aborting the batch.
#[derive(Debug, Clone)]
pub struct WindowFit {
    pub index: usize,
    /// Start time of the window in seconds from the series start.
    pub t_start: f64,
    pub spectrum: Result<DycaSpectrum, DycaError>,
}

/// Solve `c1·c0⁻¹·c1ᵀ·u = λ·c2·u` for the given triple.
///
/// Both `c0` (for the inner solve) and `c2` (for the generalized
/// eigenproblem) receive the same relative ridge. Under [`RidgePolicy::Auto`]
/// the ridge escalates from zero through [`RIDGE_LADDER`] on factorization
/// failure and the spectrum records the value that succeeded.
pub fn fit(triple: &CorrelationTriple, options: &FitOptions) -> Result<DycaSpectrum, DycaError> {
    let ladder: Vec<f64> = match options.ridge {
        RidgePolicy::Auto => RIDGE_LADDER.to_vec(),
        RidgePolicy::Fixed(r) => vec![r],
    };

    let n = triple.c0.rows();
    let mut last_failure = DycaError::Singular;
    for &ridge in &ladder {
        match try_fit_at_ridge(triple, n, ridge) {
            Ok(spectrum) => return Ok(spectrum),
            Err(LinalgError::NotPositiveDefinite { .. }) => {
                last_failure = DycaError::Singular;
            }
            Err(LinalgError::NoConvergence { .. }) => {
                last_failure = DycaError::Singular;
            }
            Err(e) => {
                return Err(DycaError::DimensionMismatch {
                    context: e.to_string(),
                })
            }
        }
    }
    Err(last_failure)
}

fn try_fit_at_ridge(
    triple: &CorrelationTriple,
    n: usize,
    ridge: f64,
) -> Result<DycaSpectrum, LinalgError> {
    let c0 = ridged(&triple.c0, ridge, n);
    let x = solve_spd(&c0, &triple.c1.transpose())?;
    let a = triple.c1.mul(&x).symmetrized();
    let eig = gen_sym_eig(&a, &triple.c2, ridge)?;
    Ok(DycaSpectrum {
        values: eig.values,
        vectors: eig.vectors,
        ridge_used: ridge,
    })
}

fn ridged(m: &Matrix, ridge: f64, n: usize) -> Matrix {
    if ridge <= 0.0 {
        return m.clone();
    }
    let shift = ridge * (m.trace() / n as f64);
    let mut out = m.clone();
    for i in 0..n {
        out[(i, i)] += shift;
    }
    out
}

/// The readout combination `v = c0⁻¹·c1ᵀ·u` paired with a projection vector.
pub fn derive_v(u: &[f64], triple: &CorrelationTriple) -> Result<Vec<f64>, DycaError> {
    derive_v_ridged(u, triple, 0.0)
}

/// [`derive_v`] with the same relative ridge on `c0` that a fit used.
pub fn derive_v_ridged(
    u: &[f64],
    triple: &CorrelationTriple,
    ridge: f64,
) -> Result<Vec<f64>, DycaError> {
    let n = triple.c0.rows();
    if u.len() != n {
        return Err(DycaError::DimensionMismatch {
            context: format!("u has length {}, triple is {n}-dimensional", u.len()),
        });
    }
    let rhs = triple.c1.transpose().mul_vec(u);
    solve_spd_vec(&ridged(&triple.c0, ridge, n), &rhs).map_err(|_| DycaError::Singular)
}

/// Span the retained eigenvectors together with their v-partners and
/// orthonormalize, revealing the dimension `n ≤ 2m` of the subspace in which
/// the dynamics close.
pub fn build_projection(
    spectrum: &DycaSpectrum,
    triple: &CorrelationTriple,
    threshold: f64,
    rank_tol: f64,
) -> Result<DycaProjection, DycaError> {
    let m = spectrum.count_above(threshold);
    if m == 0 {
        return Err(DycaError::NoComponents {
            threshold,
            largest: spectrum.values.first().copied().unwrap_or(f64::NAN),
        });
    }
    let dim = spectrum.vectors.rows();
    let u_part = spectrum.vectors.columns(0, m);
    let mut v_part = Matrix::zeros(dim, m);
    for i in 0..m {
        let v = derive_v_ridged(&u_part.column(i), triple, spectrum.ridge_used)?;
        v_part.set_column(i, &v);
    }
    let stacked = u_part.hstack(&v_part);
    let (basis, n) = orthonormal_basis(&stacked, rank_tol).map_err(|e| match e {
        LinalgError::EmptyInput => DycaError::Singular,
        other => DycaError::DimensionMismatch {
            context: other.to_string(),
        },
    })?;
    Ok(DycaProjection {
        m,
        n,
        basis,
        threshold,
        u_part,
        v_part,
    })
}

/// Amplitudes `x_j(t) = Σ_c basis[c][j]·q_c(t)`, labeled `dyca_1..n`.
pub fn project(ts: &TimeSeries, proj: &DycaProjection) -> Result<DycaAmplitudes, DycaError> {
    if ts.channels() != proj.basis.rows() {
        return Err(DycaError::DimensionMismatch {
            context: format!(
                "series has {} channels, basis lives in R^{}",
                ts.channels(),
                proj.basis.rows()
            ),
        });
    }
    let data = proj.basis.transpose().mul(ts.data());
    let labels = (1..=proj.n).map(|j| format!("dyca_{j}")).collect();
    Ok(DycaAmplitudes {
        series: TimeSeries::from_validated(data, ts.dt(), labels),
        source_window: None,
    })
}

/// Optimal readout coefficients for fixed `u` and `v`-set: solves the
/// stationarity system `Σ_j a_j·(v_jᵀ·c0·v_r) = uᵀ·c1·v_r` for every `r`.
pub fn optimal_coefficients(
    u: &[f64],
    v_set: &[Vec<f64>],
    triple: &CorrelationTriple,
) -> Result<Vec<f64>, DycaError> {
    let k = v_set.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    let n = triple.c0.rows();
    if u.len() != n || v_set.iter().any(|v| v.len() != n) {
        return Err(DycaError::DimensionMismatch {
            context: "u and every v must match the triple dimension".into(),
        });
    }
    let c0v: Vec<Vec<f64>> = v_set.iter().map(|v| triple.c0.mul_vec(v)).collect();
    let gram = Matrix::from_fn(k, k, |j, r| dot(&v_set[j], &c0v[r]));
    let c1t_u = triple.c1.transpose().mul_vec(u);
    let rhs: Vec<f64> = v_set.iter().map(|v| dot(&c1t_u, v)).collect();
    solve_spd_vec(&gram, &rhs).map_err(|_| DycaError::SingularGram)
}

/// Closed-form least-square cost
/// `D = 1 − 2·Σ_j a_j·(uᵀc1v_j)/(uᵀc2u) + Σ_{j,k} a_j a_k·(v_jᵀc0v_k)/(uᵀc2u)`.
pub fn evaluate_cost(point: &CostPoint, triple: &CorrelationTriple) -> Result<f64, DycaError> {
    if point.v_set.len() != point.a.len() {
        return Err(DycaError::DimensionMismatch {
            context: "one coefficient per v vector required".into(),
        });
    }
    let c2u = triple.c2.mul_vec(&point.u);
    let denom = dot(&point.u, &c2u);
    let positive = denom > 0.0; // NaN also fails this
    if !positive {
        return Err(DycaError::DegenerateU);
    }
    let c1t_u = triple.c1.transpose().mul_vec(&point.u);
    let mut cross = 0.0;
    for (aj, vj) in point.a.iter().zip(&point.v_set) {
        cross += aj * dot(&c1t_u, vj);
    }
    let mut quad = 0.0;
    for (aj, vj) in point.a.iter().zip(&point.v_set) {
        let c0vj = triple.c0.mul_vec(vj);
        for (ak, vk) in point.a.iter().zip(&point.v_set) {
            quad += aj * ak * dot(vk, &c0vj);
        }
    }
    Ok(1.0 - 2.0 * cross / denom + quad / denom)
}

/// Fit every full window of the series: per window the pipeline is
/// central differences, correlation triple, then [`fit`]. Failed windows are
/// reported in place so long recordings still produce a spectra trajectory.
pub fn dyca_windows(
    ts: &TimeSeries,
    wspec: &WindowSpec,
    options: &FitOptions,
) -> Result<Vec<WindowFit>, SignalError> {
    let parts = windows(ts, wspec)?;
    Ok(parts
        .iter()
        .enumerate()
        .map(|(index, w)| {
            let triple = correlation_triple(&central_difference(w));
            WindowFit {
                index,
                t_start: (index * wspec.hop()) as f64 * ts.dt(),
                spectrum: fit(&triple, options),
            }
        })
        .collect())
}
