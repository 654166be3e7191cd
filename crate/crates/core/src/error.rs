use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A model parameter lies outside its physical domain.
    #[error("parameter `{field}` out of domain: {reason}")]
    ParameterDomain { field: &'static str, reason: String },

    /// A numerical procedure cannot produce a meaningful result for these inputs.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Malformed input data (unsorted streams, mismatched geometry, ...).
    #[error("validation failed: {0}")]
    Validation(String),

    #[error("sampling grid too coarse: {0}")]
    Sampling(String),

    #[error("normal equations are rank deficient")]
    RankDeficient,

    /// Byte- or line-addressed format violation in an input file.
    #[error("format error at offset {offset}: {reason}")]
    Format { offset: u64, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(field: &'static str, reason: impl Into<String>) -> Self {
        Error::ParameterDomain {
            field,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad inputs rather than numerical breakdown.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::ParameterDomain { .. }
                | Error::Validation(_)
                | Error::Sampling(_)
                | Error::Format { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
