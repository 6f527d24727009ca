use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("radius {0} lies outside the open unit disc")]
    OutsideDisc(f64),

    #[error("exponential overflow: exponent {exponent} at t = {t}")]
    Overflow { t: f64, exponent: f64 },

    #[error("Dirichlet energy {0} exceeds one")]
    EnergyExceedsOne(f64),

    #[error("grid does not resolve the plateau edge at t = {0}")]
    GridTooCoarse(f64),

    #[error("schedule invalid at step {step}: {reason}")]
    ScheduleInvalid { step: usize, reason: String },

    #[error("series diverges: {0}")]
    SeriesDiverges(String),

    #[error("curvature data is not coercive: {0}")]
    NotCoercive(String),

    #[error("curvature is positive at r = {r} (K = {k}); the functional is not convex")]
    NonConvex { r: f64, k: f64 },

    #[error("no seed entered the feasible set after {attempts} attempts")]
    FeasibleSetEmpty { attempts: usize },

    #[error("profiles live on different grids: {0}")]
    GridMismatch(String),

    #[error("domain mask has no interior node")]
    EmptyDomain,

    #[error("inverse iteration stalled after {iterations} iterations (last change {change:e})")]
    IterationStall { iterations: usize, change: f64 },

    #[error("derivative unavailable at z = {0}")]
    DerivativeUnavailable(String),

    #[error("malformed input: {0}")]
    Parse(String),
}
