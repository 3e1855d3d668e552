use thiserror::Error;

/// Errors raised by the solvers, the time-domain oracle and the linearity tools.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    /// `I - A` is numerically singular, typically a lossless ring driven exactly on resonance.
    #[error("singular feedback system (condition estimate {condition:.3e})")]
    Singular { condition: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("fit quality: {0}")]
    FitQuality(String),

    #[error("search failed: {0}")]
    Search(String),

    #[error("at f_RF = {frequency_hz:.6e} Hz: {source}")]
    AtFrequency {
        frequency_hz: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn at_frequency(self, frequency_hz: f64) -> Self {
        Error::AtFrequency {
            frequency_hz,
            source: Box::new(self),
        }
    }

    /// Strips frequency annotations and returns the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtFrequency { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
