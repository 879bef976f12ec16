use thiserror::Error;

/// Errors raised by the numerical layers and the planners.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiveError {
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    #[error("chart singularity: |theta| = {theta} is within {margin:e} of pi/2")]
    ChartSingularity { theta: f64, margin: f64 },

    #[error("quadrature did not converge: estimated error {estimate:e} exceeds target {target:e}")]
    QuadratureNonConvergence { estimate: f64, target: f64 },

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("divergence in {op}: {detail}")]
    Divergence { op: &'static str, detail: String },

    #[error("separatrix proximity: {0}")]
    Separatrix(String),

    #[error("step size underflow at tau = {tau} (h = {h:e})")]
    StepUnderflow { tau: f64, h: f64 },

    #[error("event not found before tau = {horizon}")]
    EventNotFound { horizon: f64 },

    #[error("open loop: endpoints differ by {gap:e}")]
    OpenLoop { gap: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

impl DiveError {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        DiveError::Domain { op, detail: detail.into() }
    }
}

pub type Result<T> = std::result::Result<T, DiveError>;
