use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("nonpositive radius {radius} at direction index {index}")]
    NonPositiveRadius { radius: f64, index: usize },

    #[error("point {point:?} lies outside {region}")]
    OutsideDomain { point: Vec<f64>, region: String },

    #[error("polygon is not star-shaped about its centroid: {0}")]
    NotStarShaped(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("domain family mismatch: {0} vs {1}")]
    FamilyMismatch(String, String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("inverted triangle {triangle} after deformation (signed area {area})")]
    InvertedTriangle { triangle: usize, area: f64 },

    #[error("nonpositive coefficient k={value} at node {node}")]
    NonPositiveCoefficient { node: usize, value: f64 },

    #[error("cholesky factorization failed at pivot {pivot} (jitter {jitter})")]
    Factorization { pivot: usize, jitter: f64 },

    #[error("solver did not converge after {iterations} iterations (relative residual {residual})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("zero diagonal entry in row {0}")]
    ZeroDiagonal(usize),

    #[error("width mismatch: {0}")]
    WidthMismatch(String),

    #[error("loss became non-finite at iteration {iteration} (last finite loss {last_loss})")]
    NonFiniteLoss { iteration: usize, last_loss: f64 },

    #[error("iteration diverged: residual {residual} exceeds 10x initial {initial}")]
    Diverged { residual: f64, initial: f64 },

    #[error("no convergence within {iterations} sweeps (relative residual {residual})")]
    IterationLimit { iterations: usize, residual: f64, trace: Box<crate::him::ResidualTrace> },

    #[error("empty split")]
    EmptySplit,

    #[error("config error: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn point_f64<T: crate::Real>(x: &[T]) -> Vec<f64> {
    x.iter().map(|v| v.as_f64()).collect()
}
