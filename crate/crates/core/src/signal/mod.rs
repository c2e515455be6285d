//! Multichannel time-series container, derivative estimation, windowing, and
//! correlation-triple estimation.

mod filter;

pub use filter::bandpass_zero_phase;

use crate::linalg::Matrix;
use thiserror::Error;

/// Errors from time-series handling and filtering.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SignalError {
    /// The series has too few samples for the requested operation.
    #[error("series too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
    /// A window longer than the series was requested.
    #[error("window of {length} samples does not fit a series of {samples} samples")]
    WindowTooLong { length: usize, samples: usize },
    /// Band edges are invalid for the sample rate.
    #[error("invalid band: {reason}")]
    InvalidBand { reason: String },
    /// The sample interval must be finite and positive.
    #[error("sample interval must be finite and positive, got {dt}")]
    BadSampleInterval { dt: f64 },
    /// Data contains NaN or infinite entries.
    #[error("series data contains non-finite entries")]
    NonFinite,
    /// Label count does not match the channel count.
    #[error("got {got} labels for {channels} channels")]
    LabelMismatch { got: usize, channels: usize },
}

/// A uniformly sampled multichannel signal: channels × samples.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    data: Matrix,
    dt: f64,
    labels: Vec<String>,
}

impl TimeSeries {
    /// Wrap a channels × samples matrix. Requires at least 3 samples, a
    /// positive finite sample interval, finite data, and one label per channel.
    pub fn new(data: Matrix, dt: f64, labels: Vec<String>) -> Result<Self, SignalError> {
        if data.cols() < 3 {
            return Err(SignalError::TooShort {
                needed: 3,
                got: data.cols(),
            });
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(SignalError::BadSampleInterval { dt });
        }
        if !data.is_finite() {
            return Err(SignalError::NonFinite);
        }
        if labels.len() != data.rows() {
            return Err(SignalError::LabelMismatch {
                got: labels.len(),
                channels: data.rows(),
            });
        }
        Ok(Self { data, dt, labels })
    }

    /// Like [`TimeSeries::new`] with labels `ch1..chN`.
    pub fn with_default_labels(data: Matrix, dt: f64) -> Result<Self, SignalError> {
        let labels = (1..=data.rows()).map(|i| format!("ch{i}")).collect();
        Self::new(data, dt, labels)
    }

    // Internal constructor for data already validated upstream.
    pub(crate) fn from_validated(data: Matrix, dt: f64, labels: Vec<String>) -> Self {
        debug_assert!(data.cols() >= 3 && data.is_finite());
        Self { data, dt, labels }
    }

    pub fn channels(&self) -> usize {
        self.data.rows()
    }

    pub fn samples(&self) -> usize {
        self.data.cols()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn sample_rate(&self) -> f64 {
        1.0 / self.dt
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn data(&self) -> &Matrix {
        &self.data
    }
}

/// A signal and its derivative estimate, trimmed to shared interior samples.
#[derive(Debug, Clone)]
pub struct DerivativePair {
    /// Interior samples of the signal, channels × (T−2).
    pub q: Matrix,
    /// Central-difference derivative on the same time support.
    pub qdot: Matrix,
    /// Sample interval inherited from the source series.
    pub dt: f64,
}

/// Time-averaged second moments of a signal and its derivative.
#[derive(Debug, Clone)]
pub struct CorrelationTriple {
    /// `⟨q·qᵀ⟩`, symmetrized.
    pub c0: Matrix,
    /// `⟨q̇·qᵀ⟩`.
    pub c1: Matrix,
    /// `⟨q̇·q̇ᵀ⟩`, symmetrized.
    pub c2: Matrix,
    /// Number of samples averaged over.
    pub sample_count: usize,
}

/// Window geometry in samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    length: usize,
    hop: usize,
}

impl WindowSpec {
    /// Requires `length ≥ 3` and `hop ≥ 1`.
    pub fn new(length: usize, hop: usize) -> Result<Self, SignalError> {
        if length < 3 {
            return Err(SignalError::TooShort {
                needed: 3,
                got: length,
            });
        }
        if hop < 1 {
            return Err(SignalError::InvalidBand {
                reason: "hop must be at least one sample".into(),
            });
        }
        Ok(Self { length, hop })
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn hop(&self) -> usize {
        self.hop
    }
}

/// Butterworth bandpass description. `order` is the analog prototype order;
/// the bandpass response has twice that many poles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandpassSpec {
    pub low_hz: f64,
    pub high_hz: f64,
    pub order: usize,
}

impl BandpassSpec {
    /// Requires `0 < low < high` and an even, nonzero order.
    pub fn new(low_hz: f64, high_hz: f64, order: usize) -> Result<Self, SignalError> {
        if !(low_hz.is_finite() && high_hz.is_finite() && low_hz > 0.0 && high_hz > low_hz) {
            return Err(SignalError::InvalidBand {
                reason: format!("cutoffs must satisfy 0 < low < high, got {low_hz}..{high_hz}"),
            });
        }
        if order == 0 || !order.is_multiple_of(2) {
            return Err(SignalError::InvalidBand {
                reason: format!("order must be a positive even count, got {order}"),
            });
        }
        Ok(Self {
            low_hz,
            high_hz,
            order,
        })
    }

    /// The 0.5–30 Hz order-4 band used for EEG-style preprocessing.
    pub fn eeg_default() -> Self {
        Self {
            low_hz: 0.5,
            high_hz: 30.0,
            order: 4,
        }
    }
}

/// Second-order central differences with endpoint trimming, so signal and
/// derivative share identical time support.
pub fn central_difference(ts: &TimeSeries) -> DerivativePair {
    let n = ts.channels();
    let t = ts.samples();
    let data = ts.data();
    let inv_2dt = 1.0 / (2.0 * ts.dt());
    let q = Matrix::from_fn(n, t - 2, |i, k| data[(i, k + 1)]);
    let qdot = Matrix::from_fn(n, t - 2, |i, k| (data[(i, k + 2)] - data[(i, k)]) * inv_2dt);
    DerivativePair {
        q,
        qdot,
        dt: ts.dt(),
    }
}

/// Plain-mean second moments `c0 = ⟨qqᵀ⟩`, `c1 = ⟨q̇qᵀ⟩`, `c2 = ⟨q̇q̇ᵀ⟩` over
/// the aligned samples. No mean subtraction is applied; remove channel means
/// beforehand with [`remove_channel_means`] if desired.
pub fn correlation_triple(pair: &DerivativePair) -> CorrelationTriple {
    let k = pair.q.cols();
    let scale = 1.0 / k as f64;
    let qt = pair.q.transpose();
    let c0 = pair.q.mul(&qt).scaled(scale).symmetrized();
    let c1 = pair.qdot.mul(&qt).scaled(scale);
    let c2 = pair
        .qdot
        .mul(&pair.qdot.transpose())
        .scaled(scale)
        .symmetrized();
    CorrelationTriple {
        c0,
        c1,
        c2,
        sample_count: k,
    }
}

/// Full windows of `spec.length` samples every `spec.hop` samples, in order.
/// Windows that do not fit entirely are dropped rather than padded.
pub fn windows(ts: &TimeSeries, spec: &WindowSpec) -> Result<Vec<TimeSeries>, SignalError> {
    if spec.length > ts.samples() {
        return Err(SignalError::WindowTooLong {
            length: spec.length,
            samples: ts.samples(),
        });
    }
    let mut out = Vec::new();
    let mut start = 0usize;
    while start + spec.length <= ts.samples() {
        let data = Matrix::from_fn(ts.channels(), spec.length, |i, k| ts.data()[(i, start + k)]);
        out.push(TimeSeries::from_validated(data, ts.dt(), ts.labels.clone()));
        start += spec.hop;
    }
    Ok(out)
}

/// Subtract each channel's mean. Offered as explicit preprocessing; the
/// correlation estimates themselves never remove means.
pub fn remove_channel_means(ts: &TimeSeries) -> TimeSeries {
    let n = ts.channels();
    let t = ts.samples();
    let means: Vec<f64> = (0..n)
        .map(|i| ts.data().row(i).iter().sum::<f64>() / t as f64)
        .collect();
    let data = Matrix::from_fn(n, t, |i, k| ts.data()[(i, k)] - means[i]);
    TimeSeries::from_validated(data, ts.dt(), ts.labels.clone())
}
