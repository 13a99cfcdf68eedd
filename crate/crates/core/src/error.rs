use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("decision set must contain the origin")]
    OriginNotContained,

    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    #[error("weighted projection onto a box is not supported")]
    UnsupportedProjection,

    #[error("weighted projection did not converge after {iterations} iterations (residual {residual:e})")]
    ProjectionNotConverged { iterations: usize, residual: f64 },

    #[error("round {round}: gradient norm {norm} exceeds the bound G = {bound}")]
    GradientBound { round: usize, norm: f64, bound: f64 },

    #[error("learning rate {eta} outside (0, {max}]")]
    LearningRate { eta: f64, max: f64 },

    #[error("context learning rate {got} does not match the expert's {expected}")]
    LearningRateMismatch { expected: f64, got: f64 },

    #[error("non-finite {0}")]
    NonFinite(&'static str),

    #[error("protocol violation: {0}")]
    Protocol(&'static str),

    #[error("unknown learner `{0}` (expected one of maler, metagrad, ogd-convex, ogd-sc, ons)")]
    UnknownLearner(String),

    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
