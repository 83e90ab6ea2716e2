use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    Asymmetric { asymmetry: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("jacobi eigensolver did not converge within {cap} sweeps")]
    Convergence { cap: usize },

    #[error("matrix is rank deficient: eigenvalue {eigenvalue:e} <= threshold {threshold:e}")]
    RankDeficient { eigenvalue: f64, threshold: f64 },

    #[error("system matrix is singular or indefinite (pivot {pivot:e} at row {row})")]
    Degenerate { row: usize, pivot: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("filter design failed: {0}")]
    Design(String),

    #[error("signal too short: {len} samples, need more than {required}")]
    SignalTooShort { len: usize, required: usize },

    #[error("covariance has zero trace")]
    ZeroTrace,

    #[error("no trials for class {0}")]
    EmptyClass(u8),

    #[error("numeric failure at iteration {iteration}: {message}")]
    Numeric { iteration: usize, message: String, trace: Vec<f64> },

    #[error("cannot build folds: {0}")]
    Folds(String),

    #[error("cannot subsample training set: {0}")]
    Sampling(String),

    #[error("evaluation has no samples")]
    EmptyEvaluation,

    #[error("config error at line {line}: {message}")]
    ConfigSyntax { line: usize, message: String },

    #[error("config error: missing key '{0}'")]
    MissingKey(String),

    #[error("config error: key '{key}': {message}")]
    ConfigValue { key: String, message: String },

    #[error("dataset format error at byte {offset}: {kind}")]
    Format { offset: usize, kind: FormatError },

    #[error("malformed report at line {line}: {message}")]
    Report { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Ways an EEGB container can fail validation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormatError {
    #[error("bad magic {0:02x?}")]
    BadMagic([u8; 4]),
    #[error("unsupported version {0}")]
    UnsupportedVersion(u32),
    #[error("truncated: expected {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },
    #[error("{0} unexpected trailing bytes")]
    TrailingBytes(usize),
    #[error("header checksum mismatch (stored {stored:08x}, computed {computed:08x})")]
    Checksum { stored: u32, computed: u32 },
    #[error("invalid utf-8 in {0}")]
    Utf8(&'static str),
    #[error("invalid header field {field}: {message}")]
    Header { field: &'static str, message: String },
    #[error("trial {trial}: label {label} out of range (expected 1 or 2)")]
    LabelOutOfRange { trial: usize, label: u8 },
    #[error("trial {trial}: non-finite sample at channel {channel}, sample {sample}")]
    NonFiniteSample { trial: usize, channel: usize, sample: usize },
    #[error("class {0} has no trials")]
    MissingClass(u8),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for errors caused by bad configuration rather than a runtime failure.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::ConfigSyntax { .. }
                | Error::MissingKey(_)
                | Error::ConfigValue { .. }
                | Error::Parameter(_)
                | Error::Design(_)
                | Error::Folds(_)
                | Error::Sampling(_)
        )
    }

    /// Short machine-readable category used in single-line CLI diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension",
            Error::Asymmetric { .. } => "asymmetric",
            Error::NonFinite(_) => "non_finite",
            Error::Convergence { .. } => "convergence",
            Error::RankDeficient { .. } => "rank_deficient",
            Error::Degenerate { .. } => "degenerate",
            Error::Parameter(_) => "parameter",
            Error::Design(_) => "design",
            Error::SignalTooShort { .. } => "signal_too_short",
            Error::ZeroTrace => "zero_trace",
            Error::EmptyClass(_) => "empty_class",
            Error::Numeric { .. } => "numeric",
            Error::Folds(_) => "folds",
            Error::Sampling(_) => "sampling",
            Error::EmptyEvaluation => "empty_evaluation",
            Error::ConfigSyntax { .. } => "config_syntax",
            Error::MissingKey(_) => "missing_key",
            Error::ConfigValue { .. } => "config_value",
            Error::Format { .. } => "format",
            Error::Report { .. } => "report",
            Error::Io { .. } => "io",
        }
    }
}
