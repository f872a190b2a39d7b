use thiserror::Error;

/// Errors raised by the numerical layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("hypergeometric series diverges at z = {z} (Re(c - a - b) = {excess})")]
    DivergentSeries { z: f64, excess: f64 },

    #[error("hypergeometric parameter c = {c} is a nonpositive integer")]
    ParameterPole { c: f64 },

    #[error("hypergeometric series did not settle within {terms} terms")]
    SeriesBudgetExceeded { terms: usize },

    #[error("point (r = {r}, t = {t}) lies outside the light cone of the kernel")]
    OutsideCone { r: f64, t: f64 },

    #[error("adaptive quadrature exhausted {subdivisions} subdivisions (error estimate {estimate:e})")]
    QuadratureBudgetExceeded { subdivisions: usize, estimate: f64 },

    #[error("ODE integration exceeded {steps} steps at t = {t}")]
    StepBudgetExceeded { steps: usize, t: f64 },

    #[error("degenerate interval: t = t0 = {t}")]
    DegenerateInterval { t: f64 },

    #[error("time grid needs at least {needed} uniformly spaced samples, got {got}")]
    GridTooCoarse { needed: usize, got: usize },

    #[error("operator coefficients are singular at the requested point: {0}")]
    SingularCoordinatePoint(String),

    #[error("test function is not smooth at the requested point: {0}")]
    NonSmoothPoint(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
