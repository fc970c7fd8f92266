use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// Quadrature or iteration failed to reach its tolerance.
    #[error("numerical failure in {op}: {detail}")]
    Numerical { op: &'static str, detail: String },

    /// Operation is not defined for this input (e.g. the zonal oracle on a
    /// form that is not a pure spherical harmonic).
    #[error("unsupported input for {op}: {detail}")]
    Unsupported { op: &'static str, detail: String },

    /// Monte Carlo run rejected too many samples.
    #[error("rejection rate {rate:.3e} exceeds {limit:.1e} ({rejected} of {total} samples)")]
    Rejection {
        rejected: usize,
        total: usize,
        rate: f64,
        limit: f64,
    },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn numerical(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Numerical {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn unsupported(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Unsupported {
            op,
            detail: detail.into(),
        }
    }
}
