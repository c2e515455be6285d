//! Zero-phase Butterworth bandpass filtering.
//!
//! The filter is designed in the analog domain (Butterworth prototype,
//! lowpass-to-bandpass transform), discretized by the bilinear transform with
//! frequency pre-warping, and factored into second-order sections. Each
//! channel is filtered forward then backward so the net phase response is
//! zero, with odd-reflection padding at both ends to suppress edge
//! transients.

use super::{BandpassSpec, SignalError, TimeSeries};
use crate::linalg::Matrix;
use num_complex::Complex64;
use std::f64::consts::PI;

/// One biquad: transfer function (b0 + b1 z⁻¹ + b2 z⁻²)/(1 + a1 z⁻¹ + a2 z⁻²).
#[derive(Debug, Clone, Copy)]
struct Sos {
    b: [f64; 3],
    a: [f64; 2],
}

/// Apply the Butterworth bandpass of `spec` forward and backward per channel.
/// Shape, sample interval, and labels are preserved.
pub fn bandpass_zero_phase(
    ts: &TimeSeries,
    spec: &BandpassSpec,
) -> Result<TimeSeries, SignalError> {
    let fs = ts.sample_rate();
    let nyquist = 0.5 * fs;
    if spec.high_hz >= nyquist {
        return Err(SignalError::InvalidBand {
            reason: format!(
                "high cutoff {} Hz reaches the Nyquist frequency {} Hz",
                spec.high_hz, nyquist
            ),
        });
    }
    let pad = 3 * spec.order;
    if ts.samples() <= pad {
        return Err(SignalError::TooShort {
            needed: pad + 1,
            got: ts.samples(),
        });
    }

    let sections = design_bandpass_sections(spec, fs);
    let t = ts.samples();
    let mut out = Matrix::zeros(ts.channels(), t);
    for ch in 0..ts.channels() {
        let x: Vec<f64> = ts.data().row(ch).to_vec();
        let y = filtfilt(&sections, &x, pad);
        for k in 0..t {
            out[(ch, k)] = y[k];
        }
    }
    Ok(TimeSeries::from_validated(
        out,
        ts.dt(),
        ts.labels().to_vec(),
    ))
}

/// Butterworth bandpass as second-order sections for sample rate `fs`.
fn design_bandpass_sections(spec: &BandpassSpec, fs: f64) -> Vec<Sos> {
    let n = spec.order;
    let fs2 = 2.0 * fs;

    // Pre-warped analog band edges.
    let warped_low = fs2 * (PI * spec.low_hz / fs).tan();
    let warped_high = fs2 * (PI * spec.high_hz / fs).tan();
    let bw = warped_high - warped_low;
    let w0 = (warped_low * warped_high).sqrt();

    // Analog Butterworth prototype poles on the unit circle, left half-plane.
    let prototype: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = PI * (2 * k + n + 1) as f64 / (2 * n) as f64;
            Complex64::new(theta.cos(), theta.sin())
        })
        .collect();

    // Lowpass-to-bandpass: each prototype pole splits into a pair; n zeros
    // land at s = 0 and the gain picks up bw^n.
    let mut analog_poles = Vec::with_capacity(2 * n);
    for p in &prototype {
        let t = p * (0.5 * bw);
        let d = (t * t - Complex64::new(w0 * w0, 0.0)).sqrt();
        analog_poles.push(t + d);
        analog_poles.push(t - d);
    }

    // Bilinear transform z = (2fs + s)/(2fs − s). The n analog zeros at 0 map
    // to z = +1; the n-fold relative degree adds zeros at z = −1.
    let digital_poles: Vec<Complex64> = analog_poles
        .iter()
        .map(|p| (Complex64::new(fs2, 0.0) + p) / (Complex64::new(fs2, 0.0) - p))
        .collect();
    let mut denom = Complex64::new(1.0, 0.0);
    for p in &analog_poles {
        denom *= Complex64::new(fs2, 0.0) - p;
    }
    let gain = bw.powi(n as i32) * fs2.powi(n as i32) / denom.re;

    // Pair conjugate poles into biquads with zeros at z = ±1, the pair
    // closest to the unit circle last, gain spread evenly.
    let mut upper: Vec<Complex64> = digital_poles
        .iter()
        .filter(|p| p.im > 0.0)
        .copied()
        .collect();
    debug_assert_eq!(upper.len(), n);
    upper.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap());
    let g = gain.powf(1.0 / n as f64);
    upper
        .iter()
        .map(|p| Sos {
            b: [g, 0.0, -g],
            a: [-2.0 * p.re, p.norm_sqr()],
        })
        .collect()
}

/// Zero-phase filtering with odd-reflection padding of `pad` samples.
///
/// The forward-then-backward and backward-then-forward passes are averaged.
/// Each pass alone is zero-phase but its residual edge transient breaks the
/// symmetry between a signal and its time reversal; the average restores that
/// symmetry exactly, not just to transient accuracy.
fn filtfilt(sections: &[Sos], x: &[f64], pad: usize) -> Vec<f64> {
    let t = x.len();
    let mut ext = Vec::with_capacity(t + 2 * pad);
    for i in 0..pad {
        ext.push(2.0 * x[0] - x[pad - i]);
    }
    ext.extend_from_slice(x);
    for i in 0..pad {
        ext.push(2.0 * x[t - 1] - x[t - 2 - i]);
    }

    let fwd_bwd = backward(sections, &sosfilt(sections, &ext));
    let bwd_fwd = sosfilt(sections, &backward(sections, &ext));
    (pad..pad + t)
        .map(|k| 0.5 * (fwd_bwd[k] + bwd_fwd[k]))
        .collect()
}

/// Filter a sequence in reverse time.
fn backward(sections: &[Sos], x: &[f64]) -> Vec<f64> {
    let mut rev: Vec<f64> = x.iter().rev().copied().collect();
    rev = sosfilt(sections, &rev);
    rev.reverse();
    rev
}

/// Cascade of transposed direct-form-II biquads, states initialized to the
/// constant-input steady state scaled by the first sample.
fn sosfilt(sections: &[Sos], x: &[f64]) -> Vec<f64> {
    let mut y = x.to_vec();
    let mut input_scale = x[0];
    for s in sections {
        // Steady-state response to a unit constant input.
        let dc = (s.b[0] + s.b[1] + s.b[2]) / (1.0 + s.a[0] + s.a[1]);
        let mut z1 = (s.b[1] + s.b[2] - (s.a[0] + s.a[1]) * dc) * input_scale;
        let mut z2 = (s.b[2] - s.a[1] * dc) * input_scale;
        input_scale *= dc;
        for v in y.iter_mut() {
            let xin = *v;
            let out = s.b[0] * xin + z1;
            z1 = s.b[1] * xin - s.a[0] * out + z2;
            z2 = s.b[2] * xin - s.a[1] * out;
            *v = out;
        }
    }
    y
}
