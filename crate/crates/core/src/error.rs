use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DmuError {
    #[error("point ({re}, {im}) is outside the open unit disc")]
    OutsideDisc { re: f64, im: f64 },

    #[error("point ({re}, {im}) is outside the closed right half-plane")]
    OutsideHalfPlane { re: f64, im: f64 },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid function: {0}")]
    InvalidFunction(String),

    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integrand is not finite at ({re}, {im})")]
    NonFiniteIntegrand { re: f64, im: f64 },

    #[error("radial means diverge: mean {mean} at radius {radius}")]
    Divergent { radius: f64, mean: f64 },

    #[error("function is not outer: {0}")]
    NotOuter(String),

    #[error("validation failed: {0}")]
    Validation(String),
}

pub type Result<T> = std::result::Result<T, DmuError>;
