//! Synthetic ground-truth generators: the Rössler attractor, a linear test
//! oscillator, and noisy high-dimensional sensor embeddings.

mod dopri;

pub use dopri::integrate_dense;

use crate::linalg::{svd, Matrix};
use crate::signal::TimeSeries;
use rand::Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;
use rand_pcg::Pcg64;
use thiserror::Error;

/// Errors from simulation and embedding.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynsysError {
    /// The adaptive step-size controller underflowed its minimum step.
    #[error("integration step size underflow near t = {t}")]
    StepFailure { t: f64 },
    /// An integration or embedding specification is inconsistent.
    #[error("invalid specification: {reason}")]
    InvalidSpec { reason: String },
    /// The embedding target dimension is smaller than the source.
    #[error("cannot embed {channels} channels into {target_dim} dimensions")]
    DimensionMismatch { channels: usize, target_dim: usize },
}

/// Rössler system coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RosslerParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for RosslerParams {
    fn default() -> Self {
        Self {
            a: 0.15,
            b: 0.2,
            c: 10.0,
        }
    }
}

/// Integration window, sampling grid, tolerances, and initial state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationSpec {
    pub t_start: f64,
    pub t_end: f64,
    /// Uniform output grid spacing in seconds.
    pub dt_sample: f64,
    /// Leading stretch discarded before the first output sample.
    pub transient: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub initial_state: [f64; 3],
}

impl Default for IntegrationSpec {
    fn default() -> Self {
        Self {
            t_start: 0.0,
            t_end: 1600.0,
            dt_sample: 0.15,
            transient: 100.0,
            abs_tol: 1e-9,
            rel_tol: 1e-6,
            initial_state: [1.0, 1.0, 1.0],
        }
    }
}

impl IntegrationSpec {
    fn validate(&self) -> Result<(), DynsysError> {
        let span_ok = self.t_end > self.t_start + self.transient; // NaN fails
        if !span_ok {
            return Err(DynsysError::InvalidSpec {
                reason: format!(
                    "t_end ({}) must exceed t_start ({}) plus transient ({})",
                    self.t_end, self.t_start, self.transient
                ),
            });
        }
        if !(self.dt_sample.is_finite() && self.dt_sample > 0.0) {
            return Err(DynsysError::InvalidSpec {
                reason: format!("dt_sample must be positive, got {}", self.dt_sample),
            });
        }
        if self.transient < 0.0 {
            return Err(DynsysError::InvalidSpec {
                reason: format!("transient must be nonnegative, got {}", self.transient),
            });
        }
        Ok(())
    }

    fn sample_times(&self) -> Vec<f64> {
        let first = self.t_start + self.transient;
        let mut times = Vec::new();
        let mut k = 0usize;
        loop {
            let t = first + k as f64 * self.dt_sample;
            if t > self.t_end + 1e-9 * self.dt_sample {
                break;
            }
            times.push(t);
            k += 1;
        }
        times
    }
}

/// Right-hand side of the Rössler system.
pub fn rossler_rhs(p: &RosslerParams, x: &[f64; 3]) -> [f64; 3] {
    [
        -x[1] - x[2],
        x[0] + p.a * x[1],
        p.b - p.c * x[2] + x[0] * x[1],
    ]
}

/// Simulate the Rössler attractor on the uniform output grid of `spec` with
/// adaptive Dormand-Prince 5(4) stepping and dense-output sampling. Channels
/// are labeled `x1, x2, x3`.
pub fn simulate_rossler(
    params: &RosslerParams,
    spec: &IntegrationSpec,
) -> Result<TimeSeries, DynsysError> {
    spec.validate()?;
    let times = spec.sample_times();
    if times.len() < 3 {
        return Err(DynsysError::InvalidSpec {
            reason: format!("grid yields only {} samples; need at least 3", times.len()),
        });
    }
    let states = integrate_dense(
        |_, y| rossler_rhs(params, y),
        spec.t_start,
        spec.t_end,
        spec.initial_state,
        &times,
        spec.abs_tol,
        spec.rel_tol,
    )?;
    let data = Matrix::from_fn(3, states.len(), |i, k| states[k][i]);
    if !data.is_finite() {
        return Err(DynsysError::StepFailure { t: spec.t_end });
    }
    Ok(TimeSeries::from_validated(
        data,
        spec.dt_sample,
        vec!["x1".into(), "x2".into(), "x3".into()],
    ))
}

/// Exact samples of the harmonic oscillator `ẋ1 = x2`, `ẋ2 = −ω²·x1`,
/// started from the first two entries of `spec.initial_state`.
pub fn simulate_linear_oscillator(
    omega: f64,
    spec: &IntegrationSpec,
) -> Result<TimeSeries, DynsysError> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(DynsysError::InvalidSpec {
            reason: format!("omega must be positive, got {omega}"),
        });
    }
    spec.validate()?;
    let times = spec.sample_times();
    if times.len() < 3 {
        return Err(DynsysError::InvalidSpec {
            reason: format!("grid yields only {} samples; need at least 3", times.len()),
        });
    }
    let x0 = spec.initial_state[0];
    let v0 = spec.initial_state[1];
    let data = Matrix::from_fn(2, times.len(), |i, k| {
        let t = times[k] - spec.t_start;
        let (s, c) = (omega * t).sin_cos();
        if i == 0 {
            x0 * c + v0 / omega * s
        } else {
            -x0 * omega * s + v0 * c
        }
    });
    Ok(TimeSeries::from_validated(
        data,
        spec.dt_sample,
        vec!["x1".into(), "x2".into()],
    ))
}

/// How the sensor-loading matrix is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mixing {
    /// Identity loading; requires `target_dim` equal to the source channels.
    Identity,
    /// Full-column-rank matrix with independent standard normal entries,
    /// fixed by the seed (redrawn on the measure-zero rank failure).
    Seeded(u64),
}

/// Noise model applied after mixing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    /// `out = clean·(1 + η)` with `η ~ N(0, σ_rel²)` per sample per channel.
    Multiplicative,
    /// `out = clean + ε` with `ε ~ N(0, (rms_i·σ_rel)²)` per channel.
    Additive,
}

/// High-dimensional sensor embedding specification.
///
/// `snr_db` expresses the ratio `A/σ` of signal level to noise standard
/// deviation as `10·log₁₀(A/σ)`, with `A` taken as the per-channel RMS, so
/// `σ_rel = 10^(−snr_db/10)`. An infinite `snr_db` produces the clean
/// embedding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingSpec {
    pub target_dim: usize,
    pub mixing: Mixing,
    pub snr_db: f64,
    pub noise: NoiseKind,
}

impl EmbeddingSpec {
    /// The 25-dimensional, 15 dB multiplicative-noise sensor model.
    pub fn paper_default(mixing_seed: u64) -> Self {
        Self {
            target_dim: 25,
            mixing: Mixing::Seeded(mixing_seed),
            snr_db: 15.0,
            noise: NoiseKind::Multiplicative,
        }
    }

    /// Relative noise level implied by `snr_db`.
    pub fn sigma_rel(&self) -> f64 {
        10f64.powf(-self.snr_db / 10.0)
    }
}

/// Embed an n-channel series into `target_dim` sensor channels and apply the
/// configured noise. The mixing matrix is fixed by `spec.mixing` alone, so a
/// different `noise_seed` changes only the noise realization. Output channels
/// are labeled `ch1..N`.
pub fn embed(
    ts: &TimeSeries,
    spec: &EmbeddingSpec,
    noise_seed: u64,
) -> Result<TimeSeries, DynsysError> {
    let n = ts.channels();
    let big_n = spec.target_dim;
    if big_n < n {
        return Err(DynsysError::DimensionMismatch {
            channels: n,
            target_dim: big_n,
        });
    }
    let w = mixing_matrix(&spec.mixing, big_n, n)?;
    let mut out = w.mul(ts.data());

    let sigma_rel = spec.sigma_rel();
    if sigma_rel > 0.0 {
        let t = out.cols();
        let mut rng = Pcg64::seed_from_u64(noise_seed);
        match spec.noise {
            NoiseKind::Multiplicative => {
                for i in 0..big_n {
                    for k in 0..t {
                        let eta: f64 = rng.sample(StandardNormal);
                        out[(i, k)] *= 1.0 + sigma_rel * eta;
                    }
                }
            }
            NoiseKind::Additive => {
                for i in 0..big_n {
                    let rms = (out.row(i).iter().map(|v| v * v).sum::<f64>() / t as f64).sqrt();
                    let sd = rms * sigma_rel;
                    for k in 0..t {
                        let eps: f64 = rng.sample(StandardNormal);
                        out[(i, k)] += sd * eps;
                    }
                }
            }
        }
    }

    let labels = (1..=big_n).map(|i| format!("ch{i}")).collect();
    Ok(TimeSeries::from_validated(out, ts.dt(), labels))
}

/// The sensor-loading matrix used by [`embed`] for a given spec, exposed so
/// experiments can compare recovered subspaces against the true span.
pub fn mixing_matrix(
    mixing: &Mixing,
    target_dim: usize,
    channels: usize,
) -> Result<Matrix, DynsysError> {
    match *mixing {
        Mixing::Identity => {
            if target_dim != channels {
                return Err(DynsysError::InvalidSpec {
                    reason: format!(
                        "identity mixing needs target_dim == channels, got {target_dim} vs {channels}"
                    ),
                });
            }
            Ok(Matrix::identity(channels))
        }
        Mixing::Seeded(seed) => {
            let mut rng = Pcg64::seed_from_u64(seed);
            loop {
                let w = Matrix::from_fn(target_dim, channels, |_, _| rng.sample(StandardNormal));
                let sv = svd(&w).expect("svd of a random matrix converges").values;
                if sv[channels - 1] > 1e-10 * sv[0] {
                    return Ok(w);
                }
            }
        }
    }
}
