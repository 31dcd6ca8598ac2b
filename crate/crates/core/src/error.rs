use thiserror::Error;

/// Errors raised by the numerical and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{op}: argument out of domain ({detail})")]
    Domain { op: &'static str, detail: String },

    #[error("non-finite integrand value {value} at {point:?}")]
    NonFinite { point: Vec<f64>, value: f64 },

    #[error("{op}: quadrature did not converge (estimate {value:e}, error estimate {error:e})")]
    NotConverged {
        op: &'static str,
        value: f64,
        error: f64,
    },

    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),

    #[error(
        "oracle gate failed for n={n}: absorption CDF at s={s} is {oracle} but closed form gives {closed_form}"
    )]
    OracleGate {
        n: usize,
        s: f64,
        oracle: f64,
        closed_form: f64,
    },
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
