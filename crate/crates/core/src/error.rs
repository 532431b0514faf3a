use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("grid too coarse: spacing {spacing} exceeds {limit}")]
    Resolution { spacing: f64, limit: f64 },

    #[error("singular phase at sample {index} (magnitude {magnitude:e})")]
    SingularPhase { index: usize, magnitude: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("series not converged after {terms} terms (last term magnitude {last_term:e})")]
    Truncation { terms: usize, last_term: f64 },

    #[error("degenerate two-pole mapping: {0}")]
    DegenerateMapping(String),

    #[error("logarithm singularity: reflection amplitude is zero")]
    LogSingularity,

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("no usable data: {0}")]
    EmptyData(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by the numerics rather than by the caller's input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::SingularPhase { .. }
                | Error::Truncation { .. }
                | Error::DegenerateMapping(_)
                | Error::LogSingularity
                | Error::DegenerateFit(_)
                | Error::EmptyData(_)
        )
    }
}

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite, got {value}")))
    }
}
