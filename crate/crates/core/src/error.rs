use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("ring ensemble requires |Jz0| <= J0 (got J0={j0}, Jz0={jz0})")]
    InvalidRing { j0: f64, jz0: f64 },

    #[error("{op} is not defined for a ring ensemble")]
    RingUnsupported { op: &'static str },

    #[error("the ensemble-dependent detector has no point-like response; use measure_ensemble")]
    NotPointLike,

    #[error("stochastic sign weight must lie in [0.5, 1] (got {0})")]
    InvalidWeight(f64),

    #[error("marginals for observable {index} sum to {sum}, expected 1")]
    InconsistentMarginals { index: usize, sum: f64 },

    #[error("marginal probability {0} is outside [0, 1]")]
    MarginalOutOfRange(f64),

    #[error("outcome tree depth {depth} exceeds the cap of {cap}")]
    DepthExceeded { depth: usize, cap: usize },

    #[error("grid step {0} does not divide pi")]
    BadGridStep(f64),

    #[error("quadrature grid {n_theta}x{n_phi} is below the 8x8 minimum")]
    GridTooSmall { n_theta: usize, n_phi: usize },

    #[error("measurement sequence is empty")]
    EmptySequence,

    #[error("{0} is not a valid model here")]
    UnsupportedModel(&'static str),

    #[error("trial count must be at least 1")]
    NoTrials,
}
