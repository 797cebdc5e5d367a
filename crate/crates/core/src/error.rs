use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed WAV header: {0}")]
    MalformedHeader(String),
    #[error("unsupported WAV encoding: {0}")]
    UnsupportedEncoding(String),
    #[error("cannot read {path}: {source}")]
    FileUnreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("segment {start_s}-{end_s} s exceeds source duration {duration_s} s")]
    RangeOutOfBounds {
        start_s: f64,
        end_s: f64,
        duration_s: f64,
    },
    #[error("segment of {duration_s} s is shorter than the {min_s} s minimum")]
    SegmentTooShort { duration_s: f64, min_s: f64 },
    #[error("manifest row {row}: {source}")]
    ManifestRow {
        row: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("invalid manifest: {0}")]
    InvalidManifest(String),

    #[error("signal of {len} samples is shorter than one {frame} sample frame")]
    SignalTooShort { len: usize, frame: usize },
    #[error("all abscissae are equal; line fit is undefined")]
    DegenerateAbscissa,

    #[error("no voiced content")]
    NoVoicedContent,
    #[error("need at least 2 periods, got {0}")]
    TooFewPeriods(usize),
    #[error("fewer than 3 valid formant candidates")]
    FormantDropout,
    #[error("f0 {f0_hz} Hz puts the second harmonic above Nyquist")]
    HarmonicOutOfRange { f0_hz: f64 },

    #[error("registry mismatch: {0}")]
    RegistryMismatch(String),
    #[error("invalid feature matrix: {0}")]
    InvalidMatrix(String),

    #[error("empty group in {0}")]
    EmptyGroup(String),

    #[error("invalid synth spec: {0}")]
    InvalidSpec(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad input data rather than misuse.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::Config(_) | Error::Io(_))
    }
}
