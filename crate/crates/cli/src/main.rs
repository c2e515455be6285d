//! Command-line pipelines for dynamical component analysis: synthetic data
//! generation, noisy sensor embedding, spectrum fitting, windowed analysis,
//! projection, baselines, filtering, and method comparison.
//!
//! Every subcommand is deterministic given explicit seeds: repeated runs
//! produce byte-identical files. Exit codes are stable for scripting:
//! 0 success, 1 runtime or model failure, 2 usage error.

use clap::{Parser, Subcommand, ValueEnum};
use dyca_core::baselines::{self, BaselineError};
use dyca_core::dyca::{self, DycaError, FitOptions, RidgePolicy};
use dyca_core::dynsys::{
    self, DynsysError, EmbeddingSpec, IntegrationSpec, Mixing, NoiseKind, RosslerParams,
};
use dyca_core::io::{self, IoError};
use dyca_core::signal::{self, BandpassSpec, SignalError, WindowSpec};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "dyca",
    version,
    about = "Dynamical component analysis pipelines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the Rössler attractor and write a 3-channel CSV.
    SimulateRossler {
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        /// End of the integration window in seconds.
        #[arg(long, default_value_t = 1600.0)]
        t_end: f64,
        /// Output grid spacing in seconds.
        #[arg(long, default_value_t = 0.15)]
        dt: f64,
        /// Leading seconds discarded before the first sample.
        #[arg(long, default_value_t = 100.0)]
        transient: f64,
        #[arg(long, default_value_t = 0.15)]
        a: f64,
        #[arg(long, default_value_t = 0.2)]
        b: f64,
        #[arg(long, default_value_t = 10.0)]
        c: f64,
    },
    /// Mix a low-dimensional series into many noisy sensor channels.
    Embed {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Number of sensor channels.
        #[arg(long, default_value_t = 25)]
        dim: usize,
        /// Signal-to-noise ratio 10·log10(A/σ) in dB; `inf` disables noise.
        #[arg(long, default_value_t = 15.0)]
        snr_db: f64,
        #[arg(long, default_value_t = 1)]
        mixing_seed: u64,
        #[arg(long, default_value_t = 2)]
        noise_seed: u64,
        #[arg(long, value_enum, default_value_t = NoiseArg::Multiplicative)]
        noise: NoiseArg,
        /// Sample rate used to interpret the input file.
        #[arg(long, default_value_t = 256.0)]
        sample_rate_hz: f64,
    },
    /// Fit the eigenvalue spectrum and write the projection basis and amplitudes.
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        /// Eigenvalue threshold for keeping a component.
        #[arg(long, default_value_t = dyca::DEFAULT_THRESHOLD)]
        threshold: f64,
        /// Relative rank tolerance for the combined span.
        #[arg(long, default_value_t = dyca::DEFAULT_RANK_TOL)]
        rank_tol: f64,
        /// Fixed relative ridge; omitted means automatic escalation.
        #[arg(long)]
        ridge: Option<f64>,
        #[arg(long)]
        out_basis: PathBuf,
        #[arg(long)]
        out_amplitudes: PathBuf,
        #[arg(long)]
        out_spectrum: Option<PathBuf>,
        #[arg(long, default_value_t = 256.0)]
        sample_rate_hz: f64,
    },
    /// Windowed spectra: fit every window and write one row per window.
    Windows {
        #[arg(long = "in")]
        input: PathBuf,
        /// Run configuration (`key = value` lines).
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_spectra: PathBuf,
        /// Number of leading eigenvalues per row.
        #[arg(long, default_value_t = 3)]
        top_k: usize,
    },
    /// Project a series onto a previously fitted basis.
    Project {
        #[arg(long = "in")]
        input: PathBuf,
        /// Basis CSV written by `fit`.
        #[arg(long)]
        basis: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 256.0)]
        sample_rate_hz: f64,
    },
    /// Principal component scores of the input.
    Pca {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Optional CSV of the component loadings.
        #[arg(long)]
        out_components: Option<PathBuf>,
        #[arg(long, default_value_t = 256.0)]
        sample_rate_hz: f64,
    },
    /// Independent component sources of the input.
    Ica {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 256.0)]
        sample_rate_hz: f64,
    },
    /// Zero-phase Butterworth bandpass filter.
    Filter {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        low: f64,
        #[arg(long, default_value_t = 30.0)]
        high: f64,
        /// Analog prototype order (even).
        #[arg(long, default_value_t = 4)]
        order: usize,
        #[arg(long, default_value_t = 256.0)]
        sample_rate_hz: f64,
    },
    /// Run the fit, PCA, and ICA side by side against a known ground truth.
    Compare {
        #[arg(long = "in")]
        input: PathBuf,
        /// CSV of the true latent states on the same sample grid.
        #[arg(long)]
        truth: PathBuf,
        /// Directory for the per-method amplitude CSVs and the score table.
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = dyca::DEFAULT_THRESHOLD)]
        threshold: f64,
        #[arg(long, default_value_t = dyca::DEFAULT_RANK_TOL)]
        rank_tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 256.0)]
        sample_rate_hz: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum NoiseArg {
    Multiplicative,
    Additive,
}

impl From<NoiseArg> for NoiseKind {
    fn from(arg: NoiseArg) -> Self {
        match arg {
            NoiseArg::Multiplicative => NoiseKind::Multiplicative,
            NoiseArg::Additive => NoiseKind::Additive,
        }
    }
}

/// Failures split by exit code: usage errors exit 2, runtime failures exit 1.
enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::BadValue { .. } | IoError::UnknownKey { .. } => CliError::Usage(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<DynsysError> for CliError {
    fn from(e: DynsysError) -> Self {
        match e {
            DynsysError::InvalidSpec { .. } | DynsysError::DimensionMismatch { .. } => {
                CliError::Usage(e.to_string())
            }
            DynsysError::StepFailure { .. } => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<DycaError> for CliError {
    fn from(e: DycaError) -> Self {
        match e {
            DycaError::DimensionMismatch { .. } => CliError::Usage(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<SignalError> for CliError {
    fn from(e: SignalError) -> Self {
        match e {
            SignalError::InvalidBand { .. } | SignalError::BadSampleInterval { .. } => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<BaselineError> for CliError {
    fn from(e: BaselineError) -> Self {
        match e {
            BaselineError::KTooLarge { .. } => CliError::Usage(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::SimulateRossler {
            out,
            t_end,
            dt,
            transient,
            a,
            b,
            c,
        } => {
            let params = RosslerParams { a, b, c };
            let spec = IntegrationSpec {
                t_end,
                dt_sample: dt,
                transient,
                ..IntegrationSpec::default()
            };
            let ts = dynsys::simulate_rossler(&params, &spec)?;
            io::write_timeseries_csv(&ts, &out)?;
            println!(
                "wrote {} samples x {} channels to {}",
                ts.samples(),
                ts.channels(),
                out.display()
            );
            Ok(())
        }
        Command::Embed {
            input,
            out,
            dim,
            snr_db,
            mixing_seed,
            noise_seed,
            noise,
            sample_rate_hz,
        } => {
            let ts = io::read_timeseries_csv(&input, sample_rate_hz)?;
            if dim < ts.channels() {
                return Err(CliError::Usage(format!(
                    "--dim {dim} is below the {} input channels",
                    ts.channels()
                )));
            }
            let spec = EmbeddingSpec {
                target_dim: dim,
                mixing: Mixing::Seeded(mixing_seed),
                snr_db,
                noise: noise.into(),
            };
            let embedded = dynsys::embed(&ts, &spec, noise_seed)?;
            io::write_timeseries_csv(&embedded, &out)?;
            println!(
                "wrote {} channels to {}",
                embedded.channels(),
                out.display()
            );
            Ok(())
        }
        Command::Fit {
            input,
            threshold,
            rank_tol,
            ridge,
            out_basis,
            out_amplitudes,
            out_spectrum,
            sample_rate_hz,
        } => {
            check_threshold(threshold)?;
            let ts = io::read_timeseries_csv(&input, sample_rate_hz)?;
            let options = fit_options(ridge);
            let triple = signal::correlation_triple(&signal::central_difference(&ts));
            let spectrum = dyca::fit(&triple, &options)?;
            warn_on_inflated_values(&spectrum.values);
            let projection = dyca::build_projection(&spectrum, &triple, threshold, rank_tol)?;
            let amplitudes = dyca::project(&ts, &projection)?;

            io::write_matrix_csv(&projection.basis, ts.labels(), &out_basis)?;
            io::write_timeseries_csv(&amplitudes.series, &out_amplitudes)?;
            if let Some(path) = out_spectrum {
                write_spectrum_csv(&spectrum.values, &path)?;
            }
            println!(
                "kept {} components spanning {} directions; top eigenvalues: {}",
                projection.m,
                projection.n,
                spectrum
                    .values
                    .iter()
                    .take(3)
                    .map(|v| format!("{v:.6}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            Ok(())
        }
        Command::Windows {
            input,
            config,
            out_spectra,
            top_k,
        } => {
            if top_k < 1 {
                return Err(CliError::Usage("--top-k must be at least 1".into()));
            }
            let config = io::read_config(&config)?;
            let mut ts = io::read_timeseries_csv(&input, config.sample_rate_hz)?;
            if let Some((low, high, order)) = config.bandpass {
                let spec = BandpassSpec::new(low, high, order)?;
                ts = signal::bandpass_zero_phase(&ts, &spec)?;
            }
            let wspec = WindowSpec::new(config.window_samples(), config.hop_samples())?;
            let options = fit_options(config.ridge);
            let fits = dyca::dyca_windows(&ts, &wspec, &options)?;
            for fit in &fits {
                if let Ok(s) = &fit.spectrum {
                    warn_on_inflated_values(&s.values);
                }
            }
            io::write_spectra_csv(&fits, top_k, &out_spectra)?;
            let failures = fits.iter().filter(|f| f.spectrum.is_err()).count();
            println!(
                "wrote {} window spectra to {} ({failures} failed windows)",
                fits.len(),
                out_spectra.display()
            );
            Ok(())
        }
        Command::Project {
            input,
            basis,
            out,
            sample_rate_hz,
        } => {
            let ts = io::read_timeseries_csv(&input, sample_rate_hz)?;
            let (basis, _) = io::read_matrix_csv(&basis)?;
            if basis.rows() != ts.channels() {
                return Err(CliError::Usage(format!(
                    "basis has {} channels but the series has {}",
                    basis.rows(),
                    ts.channels()
                )));
            }
            let n = basis.cols();
            let projection = dyca::DycaProjection {
                m: n,
                n,
                basis: basis.clone(),
                threshold: f64::NAN,
                u_part: basis.clone(),
                v_part: basis,
            };
            let amplitudes = dyca::project(&ts, &projection)?;
            io::write_timeseries_csv(&amplitudes.series, &out)?;
            println!("wrote {} amplitude channels to {}", n, out.display());
            Ok(())
        }
        Command::Pca {
            input,
            out,
            k,
            out_components,
            sample_rate_hz,
        } => {
            let ts = io::read_timeseries_csv(&input, sample_rate_hz)?;
            let fitted = baselines::pca(&ts, k)?;
            let scores = baselines::pca_scores(&ts, &fitted)?;
            io::write_timeseries_csv(&scores, &out)?;
            if let Some(path) = out_components {
                io::write_matrix_csv(&fitted.components, ts.labels(), &path)?;
            }
            println!(
                "wrote {k} score channels to {}; variances: {}",
                out.display(),
                fitted
                    .variances
                    .iter()
                    .map(|v| format!("{v:.6e}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            Ok(())
        }
        Command::Ica {
            input,
            out,
            k,
            seed,
            max_iter,
            tol,
            sample_rate_hz,
        } => {
            let ts = io::read_timeseries_csv(&input, sample_rate_hz)?;
            let result = baselines::fastica(&ts, k, seed, max_iter, tol)?;
            io::write_timeseries_csv(&result.sources, &out)?;
            if !result.converged {
                eprintln!(
                    "warning: fixed-point iteration did not converge within {max_iter} iterations"
                );
            }
            println!(
                "wrote {k} source channels to {} ({} iterations)",
                out.display(),
                result.iterations_used
            );
            Ok(())
        }
        Command::Filter {
            input,
            out,
            low,
            high,
            order,
            sample_rate_hz,
        } => {
            let ts = io::read_timeseries_csv(&input, sample_rate_hz)?;
            let spec = BandpassSpec::new(low, high, order)?;
            let filtered = signal::bandpass_zero_phase(&ts, &spec)?;
            io::write_timeseries_csv(&filtered, &out)?;
            println!(
                "filtered {} channels through {low}-{high} Hz to {}",
                filtered.channels(),
                out.display()
            );
            Ok(())
        }
        Command::Compare {
            input,
            truth,
            out_dir,
            k,
            threshold,
            rank_tol,
            seed,
            sample_rate_hz,
        } => {
            check_threshold(threshold)?;
            let ts = io::read_timeseries_csv(&input, sample_rate_hz)?;
            let truth = io::read_timeseries_csv(&truth, sample_rate_hz)?;
            if truth.samples() != ts.samples() {
                return Err(CliError::Usage(format!(
                    "truth has {} samples but the input has {}",
                    truth.samples(),
                    ts.samples()
                )));
            }
            std::fs::create_dir_all(&out_dir).map_err(|e| CliError::Runtime(e.to_string()))?;

            let triple = signal::correlation_triple(&signal::central_difference(&ts));
            let spectrum = dyca::fit(&triple, &FitOptions::default())?;
            let projection = dyca::build_projection(&spectrum, &triple, threshold, rank_tol)?;
            let dyca_amps = dyca::project(&ts, &projection)?.series;

            let pca_fitted = baselines::pca(&ts, k)?;
            let pca_amps = baselines::pca_scores(&ts, &pca_fitted)?;
            let ica_amps = baselines::fastica(&ts, k, seed, 200, 1e-6)?.sources;

            io::write_timeseries_csv(&dyca_amps, &out_dir.join("dyca_amplitudes.csv"))?;
            io::write_timeseries_csv(&pca_amps, &out_dir.join("pca_amplitudes.csv"))?;
            io::write_timeseries_csv(&ica_amps, &out_dir.join("ica_amplitudes.csv"))?;

            // angles vs truth come from canonical correlations between the
            // recovered amplitudes and the true states, so all methods are
            // compared in the metric where recovery is well-posed
            let mut table = String::from("method,component,canonical_correlation,angle_rad\n");
            for (name, amps) in [("dyca", &dyca_amps), ("pca", &pca_amps), ("ica", &ica_amps)] {
                let ccs = baselines::canonical_correlations(amps, &truth)
                    .map_err(|e| CliError::Runtime(e.to_string()))?;
                for (j, c) in ccs.iter().enumerate() {
                    let angle = c.clamp(-1.0, 1.0).acos();
                    let _ = writeln!(table, "{name},{},{c:.16e},{angle:.16e}", j + 1);
                }
            }
            let table_path = out_dir.join("comparison.csv");
            std::fs::write(&table_path, table).map_err(|e| CliError::Runtime(e.to_string()))?;
            println!("wrote per-method amplitudes and {}", table_path.display());
            Ok(())
        }
    }
}

fn fit_options(ridge: Option<f64>) -> FitOptions {
    FitOptions {
        ridge: match ridge {
            Some(r) => RidgePolicy::Fixed(r),
            None => RidgePolicy::Auto,
        },
    }
}

fn check_threshold(threshold: f64) -> Result<(), CliError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(CliError::Usage(format!(
            "--threshold must lie in (0, 1], got {threshold}"
        )));
    }
    Ok(())
}

/// Finite-sample noise can push eigenvalues slightly past one; anything
/// beyond tolerance is reported but not fatal.
fn warn_on_inflated_values(values: &[f64]) {
    for v in values {
        if *v > 1.0 + 1e-6 {
            eprintln!(
                "warning: eigenvalue {v} exceeds 1 beyond tolerance; the correlation triple may be inconsistent"
            );
        }
    }
}

fn write_spectrum_csv(values: &[f64], path: &Path) -> Result<(), IoError> {
    let mut out = String::from("component,lambda\n");
    for (j, v) in values.iter().enumerate() {
        let _ = writeln!(out, "{},{v:.16e}", j + 1);
    }
    std::fs::write(path, out)?;
    Ok(())
}
