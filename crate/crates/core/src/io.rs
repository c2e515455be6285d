//! File formats and run configuration: CSV time-series ingestion and
//! serialization, spectra output, and `key = value` run configs.
//!
//! The CSV grammar is a header row of channel labels followed by one
//! comma-separated row per sample. Floats are rendered with 17 significant
//! digits so a write/read round trip reproduces every value exactly, and all
//! output uses LF line endings so repeated runs are byte-identical.

use crate::dyca::WindowFit;
use crate::linalg::Matrix;
use crate::signal::{SignalError, TimeSeries};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use thiserror::Error;

/// Errors from file handling.
#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: expected {expected} fields, found {found}")]
    RaggedRows {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: non-finite value {value}")]
    NonFinite { line: usize, value: String },
    #[error("unknown config key `{key}` on line {line}")]
    UnknownKey { key: String, line: usize },
    #[error("bad value for `{key}`: {reason}")]
    BadValue { key: String, reason: String },
    #[error("invalid series: {0}")]
    InvalidSeries(#[from] SignalError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Read a time series from CSV: header row of labels, one row per sample.
pub fn read_timeseries_csv(path: &Path, sample_rate_hz: f64) -> Result<TimeSeries, IoError> {
    if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
        return Err(IoError::BadValue {
            key: "sample_rate_hz".into(),
            reason: format!("must be positive, got {sample_rate_hz}"),
        });
    }
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(IoError::Parse {
        line: 1,
        reason: "empty file".into(),
    })?;
    let labels = split_csv_row(header);
    let channels = labels.len();

    let mut samples: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields = split_csv_row(line);
        if fields.len() != channels {
            return Err(IoError::RaggedRows {
                line: line_no,
                expected: channels,
                found: fields.len(),
            });
        }
        let mut row = Vec::with_capacity(channels);
        for f in &fields {
            let v: f64 = f.trim().parse().map_err(|_| IoError::Parse {
                line: line_no,
                reason: format!("cannot parse `{f}` as a number"),
            })?;
            if !v.is_finite() {
                return Err(IoError::NonFinite {
                    line: line_no,
                    value: f.clone(),
                });
            }
            row.push(v);
        }
        samples.push(row);
    }
    if samples.is_empty() {
        return Err(IoError::Parse {
            line: 1,
            reason: "no data rows".into(),
        });
    }

    let t = samples.len();
    let data = Matrix::from_fn(channels, t, |i, k| samples[k][i]);
    Ok(TimeSeries::new(data, 1.0 / sample_rate_hz, labels)?)
}

/// Write a time series as CSV with the grammar of [`read_timeseries_csv`].
pub fn write_timeseries_csv(ts: &TimeSeries, path: &Path) -> Result<(), IoError> {
    write_matrix_csv(ts.data(), ts.labels(), path)
}

/// Read a bare matrix in the same CSV grammar: header labels one per matrix
/// row, then one CSV row per matrix column. Used for projection bases, which
/// may have fewer columns than a valid time series has samples.
pub fn read_matrix_csv(path: &Path) -> Result<(Matrix, Vec<String>), IoError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(IoError::Parse {
        line: 1,
        reason: "empty file".into(),
    })?;
    let labels = split_csv_row(header);
    let rows = labels.len();

    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields = split_csv_row(line);
        if fields.len() != rows {
            return Err(IoError::RaggedRows {
                line: line_no,
                expected: rows,
                found: fields.len(),
            });
        }
        let mut col = Vec::with_capacity(rows);
        for f in &fields {
            let v: f64 = f.trim().parse().map_err(|_| IoError::Parse {
                line: line_no,
                reason: format!("cannot parse `{f}` as a number"),
            })?;
            if !v.is_finite() {
                return Err(IoError::NonFinite {
                    line: line_no,
                    value: f.clone(),
                });
            }
            col.push(v);
        }
        columns.push(col);
    }
    if columns.is_empty() {
        return Err(IoError::Parse {
            line: 1,
            reason: "no data rows".into(),
        });
    }
    let cols = columns.len();
    Ok((Matrix::from_fn(rows, cols, |i, j| columns[j][i]), labels))
}

/// Write any channels × samples matrix as CSV (one column per channel row).
pub fn write_matrix_csv(data: &Matrix, labels: &[String], path: &Path) -> Result<(), IoError> {
    assert_eq!(labels.len(), data.rows(), "one label per channel required");
    let mut out = String::new();
    let quoted: Vec<String> = labels.iter().map(|l| quote_label(l)).collect();
    out.push_str(&quoted.join(","));
    out.push('\n');
    for k in 0..data.cols() {
        for i in 0..data.rows() {
            if i > 0 {
                out.push(',');
            }
            write_float(&mut out, data[(i, k)]);
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Write per-window spectra: `window,t_start_s,lambda_1..lambda_k`. Failed
/// windows render `nan` eigenvalues.
pub fn write_spectra_csv(results: &[WindowFit], top_k: usize, path: &Path) -> Result<(), IoError> {
    assert!(top_k >= 1, "top_k must be at least one");
    let mut out = String::from("window,t_start_s");
    for j in 1..=top_k {
        let _ = write!(out, ",lambda_{j}");
    }
    out.push('\n');
    for fit in results {
        let _ = write!(out, "{},", fit.index);
        write_float(&mut out, fit.t_start);
        match &fit.spectrum {
            Ok(spectrum) => {
                for j in 0..top_k {
                    out.push(',');
                    match spectrum.values.get(j) {
                        Some(v) => write_float(&mut out, *v),
                        None => out.push_str("nan"),
                    }
                }
            }
            Err(_) => {
                for _ in 0..top_k {
                    out.push_str(",nan");
                }
            }
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Pipeline configuration from a `key = value` file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sample_rate_hz: f64,
    pub window_seconds: f64,
    pub hop_seconds: f64,
    pub threshold: f64,
    /// `None` selects the automatic ridge escalation ladder.
    pub ridge: Option<f64>,
    /// `(low_hz, high_hz, order)`; absent means no filtering.
    pub bandpass: Option<(f64, f64, usize)>,
    pub mixing_seed: u64,
    pub noise_seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            sample_rate_hz: 256.0,
            window_seconds: 1.0,
            hop_seconds: 1.0,
            threshold: 0.95,
            ridge: None,
            bandpass: None,
            mixing_seed: 1,
            noise_seed: 2,
        }
    }
}

impl RunConfig {
    /// Window length in samples, rounded to the nearest sample.
    pub fn window_samples(&self) -> usize {
        (self.window_seconds * self.sample_rate_hz).round() as usize
    }

    pub fn hop_samples(&self) -> usize {
        (self.hop_seconds * self.sample_rate_hz).round().max(1.0) as usize
    }
}

/// Parse a config file of `key = value` lines. `#` starts a comment, unknown
/// keys are rejected, missing keys take the defaults of [`RunConfig`].
pub fn read_config(path: &Path) -> Result<RunConfig, IoError> {
    let text = fs::read_to_string(path)?;
    parse_config(&text)
}

fn parse_config(text: &str) -> Result<RunConfig, IoError> {
    let mut config = RunConfig::default();
    let mut band_low: Option<f64> = None;
    let mut band_high: Option<f64> = None;
    let mut band_order: usize = 4;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(IoError::Parse {
            line: line_no,
            reason: "expected `key = value`".into(),
        })?;
        let key = key.trim();
        let value = value.trim();
        match key {
            "sample_rate_hz" => config.sample_rate_hz = positive(key, value)?,
            "window_seconds" => config.window_seconds = positive(key, value)?,
            "hop_seconds" => config.hop_seconds = positive(key, value)?,
            "threshold" => {
                let v = parse_num(key, value)?;
                if !(v > 0.0 && v <= 1.0) {
                    return Err(IoError::BadValue {
                        key: key.into(),
                        reason: format!("threshold must lie in (0, 1], got {v}"),
                    });
                }
                config.threshold = v;
            }
            "ridge" => {
                let v = parse_num(key, value)?;
                if v < 0.0 {
                    return Err(IoError::BadValue {
                        key: key.into(),
                        reason: format!("ridge must be nonnegative, got {v}"),
                    });
                }
                config.ridge = Some(v);
            }
            "bandpass_low_hz" => band_low = Some(positive(key, value)?),
            "bandpass_high_hz" => band_high = Some(positive(key, value)?),
            "bandpass_order" => {
                band_order = value.parse().map_err(|_| IoError::BadValue {
                    key: key.into(),
                    reason: format!("cannot parse `{value}` as a count"),
                })?;
            }
            "mixing_seed" => {
                config.mixing_seed = value.parse().map_err(|_| IoError::BadValue {
                    key: key.into(),
                    reason: format!("cannot parse `{value}` as a seed"),
                })?;
            }
            "noise_seed" => {
                config.noise_seed = value.parse().map_err(|_| IoError::BadValue {
                    key: key.into(),
                    reason: format!("cannot parse `{value}` as a seed"),
                })?;
            }
            _ => {
                return Err(IoError::UnknownKey {
                    key: key.into(),
                    line: line_no,
                })
            }
        }
    }

    match (band_low, band_high) {
        (Some(low), Some(high)) => config.bandpass = Some((low, high, band_order)),
        (None, None) => {}
        _ => {
            return Err(IoError::BadValue {
                key: "bandpass_low_hz".into(),
                reason: "both bandpass_low_hz and bandpass_high_hz must be given".into(),
            })
        }
    }
    Ok(config)
}

fn parse_num(key: &str, value: &str) -> Result<f64, IoError> {
    let v: f64 = value.parse().map_err(|_| IoError::BadValue {
        key: key.into(),
        reason: format!("cannot parse `{value}` as a number"),
    })?;
    if !v.is_finite() {
        return Err(IoError::BadValue {
            key: key.into(),
            reason: format!("value must be finite, got {value}"),
        });
    }
    Ok(v)
}

fn positive(key: &str, value: &str) -> Result<f64, IoError> {
    let v = parse_num(key, value)?;
    if v <= 0.0 {
        return Err(IoError::BadValue {
            key: key.into(),
            reason: format!("value must be positive, got {v}"),
        });
    }
    Ok(v)
}

/// 17 significant digits: enough for an exact f64 round trip.
fn write_float(out: &mut String, v: f64) {
    let _ = write!(out, "{v:.16e}");
}

fn quote_label(label: &str) -> String {
    if label.contains(',') || label.contains('"') || label.contains('\n') {
        format!("\"{}\"", label.replace('"', "\"\""))
    } else {
        label.to_string()
    }
}

/// Split one CSV row honoring double-quoted fields.
fn split_csv_row(line: &str) -> Vec<String> {
    let mut fields = Vec::new();
    let mut current = String::new();
    let mut in_quotes = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' if in_quotes => {
                if chars.peek() == Some(&'"') {
                    chars.next();
                    current.push('"');
                } else {
                    in_quotes = false;
                }
            }
            '"' => in_quotes = true,
            ',' if !in_quotes => {
                fields.push(std::mem::take(&mut current));
            }
            _ => current.push(c),
        }
    }
    fields.push(current);
    fields
}
