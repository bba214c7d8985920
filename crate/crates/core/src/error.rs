use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter violates its documented invariant.
    InvalidParameter(String),
    /// The requested voltage level is never reached by the waveform.
    NoCrossing { offset: f64, peak: f64 },
    /// The running ln R_arc exponent exceeded the configured cap.
    DivergingProfile { time: f64, exponent: f64, cap: f64 },
    TraceTooShort { len: usize, required: usize },
    SeriesTooShort { len: usize, required: usize },
    NumericalFailure(&'static str),
    RankDeficient { condition: f64 },
    EmptyBaseline,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::NoCrossing { offset, peak } => write!(
                f,
                "offset {offset} kV is never reached (waveform peak {peak} kV)"
            ),
            Error::DivergingProfile { time, exponent, cap } => write!(
                f,
                "arc resistance exponent {exponent:.3} exceeds cap {cap:.3} at t = {time:.6} s"
            ),
            Error::TraceTooShort { len, required } => {
                write!(f, "trace has {len} samples, need at least {required}")
            }
            Error::SeriesTooShort { len, required } => {
                write!(f, "series has {len} samples, need at least {required}")
            }
            Error::NumericalFailure(what) => write!(f, "numerical failure: {what}"),
            Error::RankDeficient { condition } => {
                write!(f, "rank-deficient regressor (condition estimate {condition:.3e})")
            }
            Error::EmptyBaseline => write!(f, "baseline window contains no forcing samples"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
