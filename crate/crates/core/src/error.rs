use alloc::string::String;

/// Errors produced by the design and simulation routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sample rate mismatch: expected {expected} samples/symbol, got {found}")]
    RateMismatch { expected: usize, found: usize },

    #[error("degenerate input: diagonal entry {index} is {value}, must be positive")]
    DegenerateInput { index: usize, value: f64 },

    #[error("input is not a covariance: normalized correlation {value} at ({row}, {col})")]
    NotCovariance { row: usize, col: usize, value: f64 },

    #[error("matrix is ill-conditioned (condition number {cond:e})")]
    IllConditioned { cond: f64 },

    #[error("signal of {len} samples is shorter than one segment of {segment}")]
    SignalTooShort { len: usize, segment: usize },

    #[error("target BER {target:e} unreachable in [{lo_db} dB, {hi_db} dB]: {reason}")]
    TargetUnreachable {
        target: f64,
        lo_db: f64,
        hi_db: f64,
        reason: String,
    },

    #[error("BER increased with SNR: {ber_lo:e} at {snr_lo_db} dB vs {ber_hi:e} at {snr_hi_db} dB")]
    NonMonotoneBer {
        snr_lo_db: f64,
        ber_lo: f64,
        snr_hi_db: f64,
        ber_hi: f64,
    },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::Error::InvalidParameter(alloc::format!($($arg)*))
    };
}
pub(crate) use invalid;
