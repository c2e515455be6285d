//! Dynamical component analysis for multivariate time series.
//!
//! Given a high-dimensional signal assumed to be driven by a low-dimensional
//! ODE whose right-hand side is partly linear, this crate recovers the
//! projection subspace and the generalized eigenvalue spectrum that
//! classifies the dynamics. Eigenvalues near one mark directions whose
//! derivative is explained by a linear readout of the signal; the residual
//! least-square cost at the optimum is one minus the eigenvalue.
//!
//! The crate is organized as:
//! - [`linalg`]: dense factorizations, symmetric and generalized
//!   eigensolvers, rank-revealing orthonormalization, principal angles;
//! - [`signal`]: the [`TimeSeries`] container, derivative estimation,
//!   windowing, correlation triples, and zero-phase bandpass filtering;
//! - [`dyca`]: the fit itself, subspace construction, projection, and the
//!   cost function;
//! - [`baselines`]: PCA and FastICA reference reductions plus canonical
//!   correlation scoring;
//! - [`dynsys`]: Rössler and linear-oscillator generators and noisy sensor
//!   embeddings for synthetic ground truth;
//! - [`io`]: the CSV and config file formats shared with the command-line
//!   tools.

pub mod baselines;
pub mod dyca;
pub mod dynsys;
pub mod io;
pub mod linalg;
pub mod signal;

pub use baselines::{canonical_correlations, fastica, pca, IcaResult, PcaResult};
pub use dyca::{
    build_projection, dyca_windows, evaluate_cost, fit, project, CostPoint, DycaAmplitudes,
    DycaError, DycaProjection, DycaSpectrum, FitOptions, RidgePolicy, WindowFit,
};
pub use dynsys::{
    embed, simulate_linear_oscillator, simulate_rossler, EmbeddingSpec, IntegrationSpec, Mixing,
    NoiseKind, RosslerParams,
};
pub use io::RunConfig;
pub use linalg::Matrix;
pub use signal::{
    bandpass_zero_phase, central_difference, correlation_triple, windows, BandpassSpec,
    CorrelationTriple, TimeSeries, WindowSpec,
};
