use thiserror::Error;

/// Errors raised by the geometry, parsing and verification kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("metric is singular or ill-conditioned (condition estimate {condition:e})")]
    SingularMetric { condition: f64 },

    #[error("jets of order {available} are too shallow, order {required} is required")]
    InsufficientOrder { required: usize, available: usize },

    #[error("parse error at byte {offset}: expected one of {expected:?}")]
    Parse { offset: usize, expected: Vec<String> },

    #[error("function `{name}` takes {expected} argument(s), got {found}")]
    Arity { name: String, expected: usize, found: usize },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("constraint violated: {0}")]
    ConstraintViolation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("jump function must satisfy dH/dv > 0, found {value:e} at v = {v}, z = {z:?}")]
    NonPositiveDerivative { value: f64, v: f64, z: Vec<f64> },

    #[error("step size control failed: {0}")]
    StepSize(String),

    #[error("leaf metric is singular")]
    SingularLeafMetric,

    #[error("conformal factor vanishes ({0:e})")]
    ConformalFactorZero(f64),

    #[error("wrong dimension: expected {expected}, got {found}")]
    WrongDimension { expected: usize, found: usize },

    #[error("jump function is not of wave type at this point: {0}")]
    NotWaveType(String),

    #[error("vector field is not transversal to the boundary at {0:?}")]
    NotTransversal(Vec<f64>),

    #[error("quadrature failed to reach tolerance {tolerance:e} (error estimate {estimate:e})")]
    QuadratureFailure { tolerance: f64, estimate: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
