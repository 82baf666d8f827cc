use thiserror::Error;

use crate::squid::ExperimentTrace;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {constraint}")]
    InvalidParameter {
        name: &'static str,
        constraint: String,
    },

    #[error("field evaluated at its source point {0:?}")]
    Singularity([f64; 3]),

    #[error(
        "quadrature did not converge: last estimate {last:?}, previous {previous:?}, \
         error estimate {error_estimate:e}"
    )]
    Convergence {
        last: Vec<f64>,
        previous: Vec<f64>,
        error_estimate: f64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("flux-locked loop diverged at step {step}")]
    Instability {
        step: usize,
        trace: Box<ExperimentTrace>,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, constraint: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            constraint: constraint.into(),
        }
    }
}
