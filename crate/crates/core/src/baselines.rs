//! PCA and FastICA reference reductions, plus canonical correlation between
//! multichannel series for comparing recovered amplitudes against a ground
//! truth.

use crate::linalg::{orthonormal_basis, principal_angles, sym_eig, LinalgError, Matrix};
use crate::signal::TimeSeries;
use rand::Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;
use rand_pcg::Pcg64;
use thiserror::Error;

/// Errors from the baseline reductions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BaselineError {
    /// More components requested than channels exist.
    #[error("k = {k} components requested from {channels} channels")]
    KTooLarge { k: usize, channels: usize },
    /// Too few samples for a stable estimate.
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    /// The covariance is rank deficient below the requested components.
    #[error("covariance rank is below k: {0}")]
    RankDeficient(String),
}

/// Principal component analysis of the mean-removed covariance.
#[derive(Debug, Clone)]
pub struct PcaResult {
    /// Channels × k orthonormal component loadings, by descending variance.
    pub components: Matrix,
    /// Variance captured by each component, descending.
    pub variances: Vec<f64>,
    /// Per-channel mean that was removed.
    pub mean: Vec<f64>,
}

/// FastICA unmixing result.
#[derive(Debug, Clone)]
pub struct IcaResult {
    /// k × channels unmixing matrix applied to the mean-removed signal.
    pub unmixing: Matrix,
    /// Recovered unit-variance sources, labeled `ica_1..k`.
    pub sources: TimeSeries,
    pub iterations_used: usize,
    pub converged: bool,
}

/// Top-k eigenpairs of the mean-removed covariance.
pub fn pca(ts: &TimeSeries, k: usize) -> Result<PcaResult, BaselineError> {
    let n = ts.channels();
    if k < 1 || k > n {
        return Err(BaselineError::KTooLarge { k, channels: n });
    }
    let (centered, mean) = center(ts);
    let t = ts.samples();
    let cov = centered.mul(&centered.transpose()).scaled(1.0 / t as f64);
    let eig = sym_eig(&cov).map_err(|e| BaselineError::RankDeficient(e.to_string()))?;
    Ok(PcaResult {
        components: eig.vectors.columns(0, k),
        variances: eig.values[..k].to_vec(),
        mean,
    })
}

/// Project a series onto fitted principal components, giving the k score
/// channels `pca_1..k`.
pub fn pca_scores(ts: &TimeSeries, fitted: &PcaResult) -> Result<TimeSeries, BaselineError> {
    if ts.channels() != fitted.components.rows() {
        return Err(BaselineError::KTooLarge {
            k: fitted.components.rows(),
            channels: ts.channels(),
        });
    }
    let n = ts.channels();
    let t = ts.samples();
    let centered = Matrix::from_fn(n, t, |i, s| ts.data()[(i, s)] - fitted.mean[i]);
    let scores = fitted.components.transpose().mul(&centered);
    let labels = (1..=fitted.components.cols())
        .map(|j| format!("pca_{j}"))
        .collect();
    Ok(TimeSeries::from_validated(scores, ts.dt(), labels))
}

/// FastICA with tanh contrast and symmetric decorrelation on PCA-whitened
/// data. Deterministic for a fixed seed; non-convergence is reported through
/// the `converged` flag rather than an error.
pub fn fastica(
    ts: &TimeSeries,
    k: usize,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<IcaResult, BaselineError> {
    let n = ts.channels();
    let t = ts.samples();
    if k < 1 || k > n {
        return Err(BaselineError::KTooLarge { k, channels: n });
    }
    if t < 10 * n {
        return Err(BaselineError::TooFewSamples {
            needed: 10 * n,
            got: t,
        });
    }

    let fitted = pca(ts, k)?;
    let floor = fitted.variances[0].max(f64::MIN_POSITIVE) * 1e-12;
    if fitted.variances.iter().any(|&v| v <= floor) {
        return Err(BaselineError::RankDeficient(format!(
            "whitening needs {k} positive variances"
        )));
    }
    // Whitening: rows of `white` have unit variance and zero cross-covariance.
    let wk = Matrix::from_fn(k, n, |j, i| {
        fitted.components[(i, j)] / fitted.variances[j].sqrt()
    });
    let (centered, _) = center(ts);
    let white = wk.mul(&centered);

    // Seeded random rotation, symmetrically decorrelated.
    let mut rng = Pcg64::seed_from_u64(seed);
    let init = Matrix::from_fn(k, k, |_, _| rng.sample(StandardNormal));
    let mut w = sym_decorrelate(&init);

    let mut converged = false;
    let mut iterations_used = max_iter;
    for iter in 1..=max_iter {
        let proj = w.mul(&white);
        // tanh contrast: E[g(wᵀx)xᵀ] − E[g'(wᵀx)]·w, rows updated jointly.
        let mut g = proj.clone();
        let mut g_prime_mean = vec![0.0; k];
        for j in 0..k {
            let mut acc = 0.0;
            for s in 0..t {
                let th = g[(j, s)].tanh();
                g[(j, s)] = th;
                acc += 1.0 - th * th;
            }
            g_prime_mean[j] = acc / t as f64;
        }
        let mut next = g.mul(&white.transpose()).scaled(1.0 / t as f64);
        for j in 0..k {
            for i in 0..k {
                next[(j, i)] -= g_prime_mean[j] * w[(j, i)];
            }
        }
        let next = sym_decorrelate(&next);

        // convergence: every row direction fixed up to sign
        let overlap = next.mul(&w.transpose());
        let mut lim = 0.0f64;
        for j in 0..k {
            lim = lim.max((overlap[(j, j)].abs() - 1.0).abs());
        }
        w = next;
        if lim < tol {
            converged = true;
            iterations_used = iter;
            break;
        }
    }

    let unmixing = w.mul(&wk);
    let sources = unmixing.mul(&centered);
    let labels = (1..=k).map(|j| format!("ica_{j}")).collect();
    Ok(IcaResult {
        unmixing,
        sources: TimeSeries::from_validated(sources, ts.dt(), labels),
        iterations_used,
        converged,
    })
}

/// Canonical correlations between two multichannel series, descending.
///
/// Channels are mean-centered, each set is orthonormalized over time, and the
/// correlations are the cosines of the principal angles between the two
/// sample spans.
pub fn canonical_correlations(a: &TimeSeries, b: &TimeSeries) -> Result<Vec<f64>, LinalgError> {
    if a.samples() != b.samples() {
        return Err(LinalgError::DimensionMismatch {
            context: format!("series have {} and {} samples", a.samples(), b.samples()),
        });
    }
    let (qa, _) = orthonormal_basis(&centered_columns(a), 1e-10)?;
    let (qb, _) = orthonormal_basis(&centered_columns(b), 1e-10)?;
    Ok(principal_angles(&qa, &qb)?
        .iter()
        .map(|t| t.cos())
        .collect())
}

fn center(ts: &TimeSeries) -> (Matrix, Vec<f64>) {
    let n = ts.channels();
    let t = ts.samples();
    let mean: Vec<f64> = (0..n)
        .map(|i| ts.data().row(i).iter().sum::<f64>() / t as f64)
        .collect();
    let centered = Matrix::from_fn(n, t, |i, s| ts.data()[(i, s)] - mean[i]);
    (centered, mean)
}

/// Samples × channels matrix with per-channel means removed.
fn centered_columns(ts: &TimeSeries) -> Matrix {
    let (centered, _) = center(ts);
    centered.transpose()
}

/// `(M·Mᵀ)^(−1/2)·M`, the closest matrix with orthonormal rows.
fn sym_decorrelate(m: &Matrix) -> Matrix {
    let k = m.rows();
    let gram = m.mul(&m.transpose()).symmetrized();
    let eig = sym_eig(&gram).expect("small symmetric eigenproblem converges");
    let inv_sqrt = Matrix::from_fn(k, k, |i, j| {
        let mut acc = 0.0;
        for r in 0..k {
            acc += eig.vectors[(i, r)] * eig.vectors[(j, r)] / eig.values[r].max(1e-300).sqrt();
        }
        acc
    });
    inv_sqrt.mul(m)
}
