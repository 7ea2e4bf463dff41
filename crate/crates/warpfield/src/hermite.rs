//! Piecewise quintic Hermite interpolation.
//!
//! Each knot stores value, first and second derivative, so the interpolant
//! is C^2 and reproduces all three exactly at the nodes. This is the carrier
//! that turns a sampled ODE profile back into a twice-differentiable scalar
//! field the curvature machinery can consume.

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};

/// Sampled function with derivatives, interpolated by quintic Hermite pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermiteSpline {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

impl HermiteSpline {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, d1: Vec<f64>, d2: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || ys.len() != xs.len() || d1.len() != xs.len() || d2.len() != xs.len() {
            return Err(GeomError::InvalidInput(
                "hermite spline needs >= 2 knots with matching value/derivative arrays".into(),
            ));
        }
        if !xs.windows(2).all(|w| w[1] > w[0]) {
            return Err(GeomError::InvalidInput(
                "hermite spline knots must be strictly increasing".into(),
            ));
        }
        Ok(HermiteSpline { xs, ys, d1, d2 })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    /// Value, first and second derivative at `x`.
    pub fn eval(&self, x: f64) -> Result<(f64, f64, f64)> {
        let (lo, hi) = self.range();
        if x < lo || x > hi || !x.is_finite() {
            return Err(GeomError::InterpolationRange { x, lo, hi });
        }
        // index of the interval [xs[i], xs[i+1]] containing x
        let i = match self.xs.partition_point(|&k| k <= x) {
            0 => 0,
            p if p >= self.xs.len() => self.xs.len() - 2,
            p => p - 1,
        };
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;

        let (t2, t3) = (t * t, t * t * t);
        let (t4, t5) = (t3 * t, t3 * t2);

        // quintic Hermite basis and its t-derivatives
        let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
        let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
        let h2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
        let h3 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
        let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
        let h5 = 0.5 * t3 - t4 + 0.5 * t5;

        let d0 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
        let d1b = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
        let d2b = t - 4.5 * t2 + 6.0 * t3 - 2.5 * t4;
        let d3 = 30.0 * t2 - 60.0 * t3 + 30.0 * t4;
        let d4 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
        let d5 = 1.5 * t2 - 4.0 * t3 + 2.5 * t4;

        let s0 = -60.0 * t + 180.0 * t2 - 120.0 * t3;
        let s1 = -36.0 * t + 96.0 * t2 - 60.0 * t3;
        let s2 = 1.0 - 9.0 * t + 18.0 * t2 - 10.0 * t3;
        let s3 = 60.0 * t - 180.0 * t2 + 120.0 * t3;
        let s4 = -24.0 * t + 84.0 * t2 - 60.0 * t3;
        let s5 = 3.0 * t - 12.0 * t2 + 10.0 * t3;

        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (p0, p1) = (self.d1[i], self.d1[i + 1]);
        let (q0, q1) = (self.d2[i], self.d2[i + 1]);

        let val = y0 * h0 + h * p0 * h1 + h * h * q0 * h2 + y1 * h3 + h * p1 * h4 + h * h * q1 * h5;
        let der = (y0 * d0 + h * p0 * d1b + h * h * q0 * d2b + y1 * d3 + h * p1 * d4 + h * h * q1 * d5) / h;
        let sec = (y0 * s0 + h * p0 * s1 + h * h * q0 * s2 + y1 * s3 + h * p1 * s4 + h * h * q1 * s5)
            / (h * h);
        Ok((val, der, sec))
    }
}
