use thiserror::Error;

use crate::elliptic::SolveReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {left} vs {right}")]
    GridMismatch { left: String, right: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite values passed to {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Neumann compatibility violated: mean defect {defect:e} exceeds {threshold:e}")]
    Compatibility { defect: f64, threshold: f64 },

    #[error("{solver} did not converge ({report})")]
    NotConverged {
        solver: &'static str,
        report: SolveReport,
    },

    #[error("singular xi system: det = {det:e}, scale = {scale:e} (try a smaller time step)")]
    SingularXi { det: f64, scale: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("snapshot format: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
