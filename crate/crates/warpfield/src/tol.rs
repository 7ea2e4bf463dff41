//! Centralized numerical tolerances.
//!
//! Every threshold used by the curvature and verification machinery lives
//! here so that no module carries ad-hoc magic numbers.

/// Tolerance configuration shared by all sampling operations.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Central finite-difference step for quantities that need third
    /// derivatives of the metric (scalar-curvature gradient). Documented
    /// accuracy is ~1e-6 relative.
    pub fd_step: f64,
    /// SPD check: smallest Cholesky pivot must exceed `spd_pivot_ratio`
    /// times the largest pivot.
    pub spd_pivot_ratio: f64,
    /// Soliton residual threshold below which an instance counts as verified.
    pub residual: f64,
    /// Fiber scalar-curvature constancy: deviation <= tol * max(1, |mean|).
    pub fiber_constancy: f64,
    /// Uniform gradient-norm threshold below which a potential is trivial.
    pub triviality: f64,
    /// Boundary margin stripped from open domain boxes when sampling, as a
    /// fraction of the axis width (also an absolute floor for unbounded axes).
    pub boundary_margin: f64,
    /// Minimum |grad h| for unit-direction quantities in the bounds module.
    pub direction_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            fd_step: 1e-5,
            spd_pivot_ratio: 1e-12,
            residual: 1e-6,
            fiber_constancy: 1e-6,
            triviality: 1e-10,
            boundary_margin: 1e-3,
            direction_floor: 1e-8,
        }
    }
}
