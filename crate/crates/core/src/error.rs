use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A scaled error-function difference whose magnitude exceeds the f64 range.
    #[error("result magnitude is not representable in f64")]
    OverflowUnrepresentable,

    #[error("negative temperature: {0} K")]
    NegativeTemperature(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("adaptive quadrature did not converge after {evaluations} integrand evaluations")]
    QuadratureNonConvergence { evaluations: usize },

    /// The peak-normalized distribution never drops to one half over the scanned range.
    #[error("angular distribution never drops below one half (min {min_value:.6})")]
    NoHalfCrossing { min_value: f64 },

    #[error("calibration FWHM is not strictly decreasing at point indices {indices:?}")]
    NonMonotoneCurve { indices: Vec<usize> },

    #[error("no finite emission cone at T = {temperature} K (flat regime)")]
    FlatRegime { temperature: f64 },

    #[error("FWHM {fwhm_deg} deg is outside the calibrated range [{min_deg}, {max_deg}] deg")]
    OutOfCalibrationRange {
        fwhm_deg: f64,
        min_deg: f64,
        max_deg: f64,
    },

    #[error("temperature bracket [{lo}, {hi}] K does not straddle the target FWHM")]
    BracketInvalid { lo: f64, hi: f64 },

    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("calibration fingerprint mismatch: file has {found}, model gives {expected}")]
    FingerprintMismatch { expected: String, found: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn format(line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            line,
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
