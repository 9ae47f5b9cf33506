use std::io;
use std::ops::Range;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised anywhere in the simulator, estimator or stream harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("intensity must be positive, got {0}")]
    NonPositiveIntensity(f64),

    #[error("invalid configuration: {key} = {value} (accepted: {accepted})")]
    InvalidConfig {
        key: String,
        value: String,
        accepted: String,
    },

    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),

    #[error("malformed term list: {0}")]
    MalformedTerms(String),

    #[error("schedule has no {0} bin; selective pairing needs at least one D and one A bin")]
    UnbalancedSchedule(&'static str),

    #[error("no D/A pairs available for the selective measurement")]
    NoPairs,

    #[error("selective measurement undefined for coherent-overlap streams")]
    SelectiveMeasurementUndefined,

    #[error("zero denominator in correlation normalization")]
    ZeroDenominator,

    #[error("phase {eta_ab} rad is outside both classification windows (tol {tol})")]
    Unclassified { eta_ab: f64, tol: f64 },

    #[error("empty sample stream")]
    EmptyStream,

    #[error("config mismatch: {0}")]
    ConfigMismatch(String),

    #[error("framing error: {0}")]
    Framing(String),

    #[error("unknown source tag byte {0}")]
    UnknownSourceTag(u8),

    #[error("bad stream magic {0:?}")]
    BadMagic([u8; 4]),

    #[error("unsupported stream version {0}")]
    VersionMismatch(u8),

    #[error("stream gap: {party} stream is missing bins {}..{}", missing.start, missing.end)]
    StreamGap {
        party: &'static str,
        missing: Range<u64>,
    },

    #[error("connection failed after {attempts} attempts: {source}")]
    Connect {
        attempts: u32,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConfigMismatch(_) => 2,
            Error::Framing(_)
            | Error::UnknownSourceTag(_)
            | Error::BadMagic(_)
            | Error::VersionMismatch(_) => 3,
            Error::StreamGap { .. } => 4,
            _ => 1,
        }
    }

    pub(crate) fn invalid(key: &str, value: impl ToString, accepted: &str) -> Self {
        Error::InvalidConfig {
            key: key.to_string(),
            value: value.to_string(),
            accepted: accepted.to_string(),
        }
    }
}
