use thiserror::Error;

/// Everything that can go wrong while building or solving a reversal problem.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RevertError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid Gaussian state: {0}")]
    InvalidState(String),

    #[error("channel is not completely positive (min eigenvalue {min_eig:e})")]
    NotCp { min_eig: f64 },

    #[error("displacement matrix is singular or ill-conditioned (condition number {cond:e})")]
    SingularX { cond: f64 },

    #[error("state family sits on the uncertainty boundary (min eigenvalue {min_eig:e})")]
    BoundaryFamily { min_eig: f64 },

    #[error("spectrum is degenerate: eigenvalue gap {gap:e} below tolerance")]
    DegenerateSpectrum { gap: f64 },

    #[error("state is rank deficient: smallest eigenvalue {min_eig:e}")]
    RankDeficient { min_eig: f64 },

    #[error("perturbed state is not positive semidefinite (min eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },

    #[error("invalid qudit state: {0}")]
    InvalidQuditState(String),

    #[error("invalid qudit channel: {0}")]
    InvalidChannel(String),

    #[error("parameter out of domain: {0}")]
    Domain(String),
}

impl RevertError {
    /// Stable machine-readable identifier, used in CLI error reports.
    pub fn code(&self) -> &'static str {
        match self {
            RevertError::DimensionMismatch(_) => "DimensionMismatch",
            RevertError::InvalidState(_) => "InvalidState",
            RevertError::NotCp { .. } => "NotCp",
            RevertError::SingularX { .. } => "SingularX",
            RevertError::BoundaryFamily { .. } => "BoundaryFamily",
            RevertError::DegenerateSpectrum { .. } => "DegenerateSpectrum",
            RevertError::RankDeficient { .. } => "RankDeficient",
            RevertError::NotPsd { .. } => "NotPsd",
            RevertError::InvalidQuditState(_) => "InvalidQuditState",
            RevertError::InvalidChannel(_) => "InvalidChannel",
            RevertError::Domain(_) => "Domain",
        }
    }
}

pub type Result<T> = std::result::Result<T, RevertError>;
