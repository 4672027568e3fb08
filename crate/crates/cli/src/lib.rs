//! `stokes-thermo`: angular Stokes distributions, calibration curves,
//! temperature inversion and symmetric-state weights from the command line.

pub mod config;

use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};
use stokes_core::collective::weight_scan_with;
use stokes_core::emission::angular_scan_with;
use stokes_core::thermometry::{self, log_spaced, CalibrationCurve};
use stokes_core::{EmissionIntegrator, Error};
use thiserror::Error;

pub use config::{parse_config, parse_temperature, ConfigError, RunConfig};

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    /// Command-line usage error (also used by the argument parser).
    pub const USAGE: u8 = 2;
    pub const CONFIG: u8 = 3;
    /// File could not be read or written, or a calibration file is malformed.
    pub const IO_FORMAT: u8 = 4;
    /// No finite emission cone at the requested temperature and pulse.
    pub const FLAT_REGIME: u8 = 5;
    pub const OUT_OF_CALIBRATION_RANGE: u8 = 6;
    pub const FINGERPRINT_MISMATCH: u8 = 7;
    /// Any other numerical or model error.
    pub const NUMERICAL: u8 = 8;
}

#[derive(Parser, Debug)]
#[command(name = "stokes-thermo", version, about = "Temperature of atomic ensembles from the Stokes emission cone")]
pub struct Cli {
    /// Run configuration (`section.key = value`); defaults if omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output file; standard output if omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Peak-normalized angular distribution, CSV `theta_deg,p_normalized`.
    Distribution {
        /// Cloud temperature, e.g. 300K, 1mK, 100uK.
        #[arg(long, value_parser = parse_temperature)]
        temperature: f64,
    },
    /// FWHM-vs-temperature calibration curve over the configured grid.
    Calibrate,
    /// Temperature for a measured cone width; prints `temperature_K=<value>`.
    Invert {
        /// Calibration file written by `calibrate`.
        #[arg(long, value_name = "PATH")]
        calibration: PathBuf,
        /// Measured full width at half maximum, degrees.
        #[arg(long)]
        fwhm_deg: f64,
        /// Refine the interpolated value by bisection on the forward model.
        #[arg(long)]
        refine: bool,
    },
    /// Symmetric-state weight, CSV `theta_deg,symmetric_weight`.
    #[command(group(ArgGroup::new("motion").required(true).args(["temperature", "motion_radius_m"])))]
    Overlap {
        #[arg(long, value_parser = parse_temperature)]
        temperature: Option<f64>,
        /// Motion radius A in metres, instead of a temperature.
        #[arg(long)]
        motion_radius_m: Option<f64>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    fn io(path: &Path, e: impl ToString) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }

    /// Error name printed on standard error.
    pub fn name(&self) -> &'static str {
        match self {
            CliError::Config(ConfigError::Parse { .. }) => "ConfigParseError",
            CliError::Config(ConfigError::Validation(_)) => "ConfigValidationError",
            CliError::Io { .. } => "IoError",
            CliError::Core(e) => match e {
                Error::OverflowUnrepresentable => "OverflowUnrepresentable",
                Error::NegativeTemperature(_) => "NegativeTemperature",
                Error::InvalidParameter { .. } => "InvalidParameter",
                Error::QuadratureNonConvergence { .. } => "QuadratureNonConvergence",
                Error::NoHalfCrossing { .. } => "NoHalfCrossing",
                Error::NonMonotoneCurve { .. } => "NonMonotoneCurve",
                Error::FlatRegime { .. } => "FlatRegime",
                Error::OutOfCalibrationRange { .. } => "OutOfCalibrationRange",
                Error::BracketInvalid { .. } => "BracketInvalid",
                Error::Format { .. } => "FormatError",
                Error::FingerprintMismatch { .. } => "FingerprintMismatch",
                Error::Io(_) => "IoError",
            },
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Io { .. } => exit::IO_FORMAT,
            CliError::Core(e) => match e {
                Error::Format { .. } | Error::Io(_) => exit::IO_FORMAT,
                Error::FlatRegime { .. } | Error::NoHalfCrossing { .. } => exit::FLAT_REGIME,
                Error::OutOfCalibrationRange { .. } => exit::OUT_OF_CALIBRATION_RANGE,
                Error::FingerprintMismatch { .. } => exit::FINGERPRINT_MISMATCH,
                Error::InvalidParameter { .. } | Error::NegativeTemperature(_) => exit::USAGE,
                _ => exit::NUMERICAL,
            },
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            Ok(parse_config(&text)?)
        }
    }
}

fn emit(output: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match output {
        Some(p) => fs::write(p, bytes).map_err(|e| CliError::io(p, e)),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn integrator(config: &RunConfig, temperature: Option<f64>, radius: Option<f64>) -> Result<EmissionIntegrator, CliError> {
    let app = config.apparatus()?;
    let model = match (temperature, radius) {
        (Some(t), _) => app.model(config.tau_s, t)?,
        (None, Some(a)) => app.model_with_radius(config.tau_s, a)?,
        (None, None) => unreachable!("argument group requires one of the two"),
    };
    Ok(EmissionIntegrator::new(&model, config.nodes_per_axis)?)
}

pub fn cmd_distribution(config: &RunConfig, temperature: f64) -> Result<Vec<u8>, CliError> {
    let integ = integrator(config, Some(temperature), None)?;
    let s = config.scan_settings();
    let dist = angular_scan_with(&integ, s.phi, s.theta_max, s.n_points)?;
    let mut out = Vec::new();
    dist.write_csv(&mut out)?;
    Ok(out)
}

/// Returns the calibration file and the flat-regime temperatures dropped.
pub fn cmd_calibrate(config: &RunConfig) -> Result<(Vec<u8>, Vec<f64>), CliError> {
    let app = config.apparatus()?;
    let grid = log_spaced(config.t_min_k, config.t_max_k, config.n_points)?;
    let (curve, dropped) =
        thermometry::calibrate_trimmed(&app, config.tau_s, &grid, &config.scan_settings())?;
    let mut out = Vec::new();
    curve.save(&mut out)?;
    Ok((out, dropped))
}

pub fn cmd_invert(
    config: &RunConfig,
    calibration: &Path,
    fwhm_deg: f64,
    refine: bool,
) -> Result<String, CliError> {
    let app = config.apparatus()?;
    let file = fs::File::open(calibration).map_err(|e| CliError::io(calibration, e))?;
    let expected = app.fingerprint(config.tau_s);
    let curve = CalibrationCurve::load(BufReader::new(file), Some(&expected))?;
    let fwhm = fwhm_deg.to_radians();
    let mut t = curve.invert(fwhm)?;
    if refine {
        let bracket = curve.bracket(fwhm)?;
        t = thermometry::refine_temperature(
            &app,
            config.tau_s,
            fwhm,
            bracket,
            config.rel_tol,
            &config.scan_settings(),
        )?;
    }
    Ok(format!("temperature_K={t}\n"))
}

pub fn cmd_overlap(
    config: &RunConfig,
    temperature: Option<f64>,
    motion_radius_m: Option<f64>,
) -> Result<Vec<u8>, CliError> {
    let integ = integrator(config, temperature, motion_radius_m)?;
    let s = config.scan_settings();
    let profile = weight_scan_with(&integ, s.phi, s.theta_max, s.n_points)?;
    let mut out = Vec::new();
    if let Some(width) = profile.fwhm_marker() {
        writeln!(out, "# fwhm_deg={:.15e}", width.to_degrees()).map_err(Error::from)?;
    }
    profile.write_csv(&mut out)?;
    Ok(out)
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let config = load_config(cli.config.as_deref())?;
    let output = cli.output.as_deref();
    match &cli.command {
        Command::Distribution { temperature } => emit(output, &cmd_distribution(&config, *temperature)?),
        Command::Calibrate => {
            let (bytes, dropped) = cmd_calibrate(&config)?;
            for t in dropped {
                eprintln!("warning: dropped T = {t} K from the calibration grid (flat regime, no finite cone)");
            }
            emit(output, &bytes)
        }
        Command::Invert {
            calibration,
            fwhm_deg,
            refine,
        } => emit(output, cmd_invert(&config, calibration, *fwhm_deg, *refine)?.as_bytes()),
        Command::Overlap {
            temperature,
            motion_radius_m,
        } => emit(output, &cmd_overlap(&config, *temperature, *motion_radius_m)?),
    }
}

/// Parses the process arguments, runs the command and maps errors to exit codes.
pub fn run() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::from(exit::OK),
        Err(e) => {
            eprintln!("error: {}: {e}", e.name());
            ExitCode::from(e.exit_code())
        }
    }
}
