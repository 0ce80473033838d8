use thiserror::Error;

/// A parameter outside its admissible range.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("parameter `{name}` = {value}: {reason}")]
pub struct ParamError {
    pub name: String,
    pub value: f64,
    pub reason: &'static str,
}

impl ParamError {
    pub fn new(name: impl Into<String>, value: f64, reason: &'static str) -> Self {
        Self {
            name: name.into(),
            value,
            reason,
        }
    }

    pub(crate) fn require_positive(name: &str, value: f64) -> Result<(), Self> {
        if value.is_finite() && value > 0.0 {
            Ok(())
        } else {
            Err(Self::new(name, value, "must be finite and > 0"))
        }
    }

    pub(crate) fn require_non_negative(name: &str, value: f64) -> Result<(), Self> {
        if value.is_finite() && value >= 0.0 {
            Ok(())
        } else {
            Err(Self::new(name, value, "must be finite and >= 0"))
        }
    }

    pub(crate) fn require_finite(name: &str, value: f64) -> Result<(), Self> {
        if value.is_finite() {
            Ok(())
        } else {
            Err(Self::new(name, value, "must be finite"))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RoadError {
    #[error("course has no segments")]
    EmptyCourse,
    #[error("segment {index}: {reason}")]
    BadSegment { index: usize, reason: String },
    #[error("point is {distance:.3} m from the path (limit {limit} m)")]
    TooFarFromPath { distance: f64, limit: f64 },
    /// Two distinct arc-length candidates are equally near; `s` is the smaller.
    #[error("ambiguous projection, candidates tie at s = {s}")]
    AmbiguousProjection { s: f64 },
    #[error(transparent)]
    Param(#[from] ParamError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    Config(String),
    #[error("state `{state}` diverged ({value:e}) at t = {t:.4} s (log sample {sample})")]
    Divergence {
        state: &'static str,
        value: f64,
        t: f64,
        sample: usize,
    },
    #[error("road geometry failed at t = {t:.4} s: {source}")]
    Road {
        t: f64,
        #[source]
        source: RoadError,
    },
    #[error(transparent)]
    Param(#[from] ParamError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("log has {log} rows but reference has {reference}")]
    LengthMismatch { log: usize, reference: usize },
    #[error("log is empty")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IdentError {
    #[error("reference output is constant; fit percentage undefined")]
    ConstantReference,
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("loss is not finite (check the dataset for NaN/inf values)")]
    NonFiniteLoss,
    #[error("invalid dataset: {0}")]
    Dataset(String),
    #[error("invalid identification config: {0}")]
    Config(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// A rejected configuration entry. `line` is 1-based when the error comes
/// from parsing a document.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{}{}{message}", line.map(|l| format!("line {l}: ")).unwrap_or_default(), key.as_ref().map(|k| format!("`{k}`: ")).unwrap_or_default())]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl ConfigError {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            line: None,
            key: None,
            message: message.into(),
        }
    }

    pub fn at(line: usize, key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            key: Some(key.into()),
            message: message.into(),
        }
    }

    pub fn for_key(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            line: None,
            key: Some(key.into()),
            message: message.into(),
        }
    }
}
