use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("Kepler solver did not converge (M = {mean_anomaly}, e = {eccentricity})")]
    KeplerNonConvergence { mean_anomaly: f64, eccentricity: f64 },
    #[error("invalid {what}: {detail}")]
    Domain { what: &'static str, detail: String },
    #[error("path must contain at least two nodes")]
    DegeneratePath,
    #[error("path success probability is zero")]
    ZeroSuccessProbability,
}

impl CoreError {
    pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Self {
        CoreError::Domain {
            what,
            detail: detail.into(),
        }
    }
}

pub type Result<T, E = CoreError> = std::result::Result<T, E>;
