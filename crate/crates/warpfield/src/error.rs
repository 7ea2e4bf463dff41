//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeomError {
    /// A partial node (ln, sqrt, quotient, noninteger power) was evaluated
    /// outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Metric failed the positive-definiteness check at a sample point.
    #[error("metric not positive definite at {point:?} (pivot ratio {pivot_ratio:.3e})")]
    Spd { point: Vec<f64>, pivot_ratio: f64 },

    /// A quantity required to be strictly positive (warping function) was not.
    #[error("positivity violated: {0}")]
    Positivity(String),

    /// Fiber scalar curvature varies beyond tolerance.
    #[error("fiber scalar curvature not constant: deviation {deviation:.3e} exceeds {tolerance:.3e}")]
    Constancy { deviation: f64, tolerance: f64 },

    /// A formula with an n-1 (or similar) denominator was applied at an
    /// unsupported dimension.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// Every grid point was skipped (e.g. |grad h| below the direction floor).
    #[error("no valid points: {0}")]
    NoValidPoints(String),

    #[error("unknown catalog id: {0}")]
    UnknownId(String),

    /// Profile integration halted at a zero of phi. Informational: carries
    /// the r value where the critical point was located.
    #[error("critical point of the soliton function reached at r = {r}")]
    CriticalPointReached { r: f64 },

    #[error("profile integration overflowed at r = {r}")]
    Overflow { r: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("interpolation query x = {x} outside sampled range [{lo}, {hi}]")]
    InterpolationRange { x: f64, lo: f64, hi: f64 },

    #[error("spec parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;
