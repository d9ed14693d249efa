use thiserror::Error;

use crate::sdp::SdpStatus;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {detail}")]
    DimensionMismatch { op: &'static str, detail: String },

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("channel is not trace preserving: |sum K^dag K - I| = {deviation:.3e} exceeds tolerance {tol:.1e}")]
    NotTracePreserving { deviation: f64, tol: f64 },

    #[error("Choi matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotCompletelyPositive { min_eigenvalue: f64 },

    #[error("parameter {name} = {value} is out of range {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("invalid channel file: {0}")]
    Parse(String),

    #[error("optimizer failed to converge on all {starts} starts")]
    NoConvergence { starts: usize },

    #[error(
        "SDP solver finished with status {status:?} after {iterations} iterations (gap {gap:.3e})"
    )]
    Solver {
        status: SdpStatus,
        iterations: usize,
        gap: f64,
    },

    #[error("malformed SDP: {0}")]
    MalformedSdp(String),
}

impl Error {
    pub(crate) fn dims(op: &'static str, detail: impl Into<String>) -> Self {
        Error::DimensionMismatch {
            op,
            detail: detail.into(),
        }
    }

    /// True for failures of the numerical back ends (optimizer or SDP solver)
    /// as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NoConvergence { .. } | Error::Solver { .. })
    }
}
