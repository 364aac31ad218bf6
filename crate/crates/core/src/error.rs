use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure classes surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// An enumeration would exceed its configured work limit.
    #[error("{what}: {required} exceeds the enumeration cap of {cap}")]
    CapExceeded {
        what: &'static str,
        required: String,
        cap: u64,
    },

    /// A failure inside one Monte Carlo trial.
    #[error("trial {trial}: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<Error>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Domain,
    Resource,
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn cap(what: &'static str, required: impl ToString, cap: u64) -> Self {
        Error::CapExceeded {
            what,
            required: required.to_string(),
            cap,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Domain(_) => ErrorKind::Domain,
            Error::CapExceeded { .. } => ErrorKind::Resource,
            Error::Trial { source, .. } => source.kind(),
        }
    }
}
