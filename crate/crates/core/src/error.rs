use thiserror::Error;

use crate::integrate::QuadError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument or parameter lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A defining integral (or series) does not converge.
    #[error("divergent: {what}: {source}")]
    Divergent {
        what: String,
        #[source]
        source: QuadError,
    },

    /// The model has no quantile function, so it cannot be sampled by inversion.
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("no closed form catalogued for {0}")]
    NoClosedForm(String),

    /// Survival probability at the requested age is zero (or below 1e-12).
    #[error("survival vanishes at t = {t}")]
    DeadAt { t: f64 },

    #[error("support mismatch: {0}")]
    SupportMismatch(String),

    #[error("infinite mean: {0}")]
    InfiniteMean(String),

    #[error("iterative solver did not converge: {0}")]
    NonConvergence(String),

    #[error("empty sample")]
    EmptySample,

    #[error("sample has zero spread")]
    ZeroSpread,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn divergent(what: impl Into<String>, source: QuadError) -> Self {
        Error::Divergent {
            what: what.into(),
            source,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Divergent { .. }
                | Error::NonConvergence(_)
                | Error::InfiniteMean(_)
                | Error::DeadAt { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
