//! Closed-form scalar expression trees over chart coordinates.
//!
//! Every scalar field in the system (metric components, warping functions,
//! soliton potentials) is a `ScalarExpr`, so all first and second derivatives
//! can be taken exactly by jet arithmetic instead of finite differences.
//!
//! The JSON encoding is the tagged tree used by the manifold-spec file
//! format, e.g. `{"op":"cosh","arg":{"op":"coord","index":0}}`.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use crate::hermite::HermiteSpline;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum ScalarExpr {
    Const { value: f64 },
    Coord { index: usize },
    Add { args: Vec<ScalarExpr> },
    Mul { args: Vec<ScalarExpr> },
    Div { num: Box<ScalarExpr>, den: Box<ScalarExpr> },
    /// Integer exponents are expanded multiplicatively; noninteger exponents
    /// require a strictly positive base.
    Pow { base: Box<ScalarExpr>, exponent: f64 },
    Neg { arg: Box<ScalarExpr> },
    Exp { arg: Box<ScalarExpr> },
    Ln { arg: Box<ScalarExpr> },
    Sin { arg: Box<ScalarExpr> },
    Cos { arg: Box<ScalarExpr> },
    Sinh { arg: Box<ScalarExpr> },
    Cosh { arg: Box<ScalarExpr> },
    Tanh { arg: Box<ScalarExpr> },
    Sqrt { arg: Box<ScalarExpr> },
    /// Sampled 1-D profile in one coordinate, interpolated C^2. Produced by
    /// the metric-reconstruction path; not part of hand-written spec files.
    Spline { coord: usize, knots: Arc<HermiteSpline> },
}

impl ScalarExpr {
    pub fn constant(value: f64) -> Self {
        ScalarExpr::Const { value }
    }

    pub fn coord(index: usize) -> Self {
        ScalarExpr::Coord { index }
    }

    pub fn pow(self, exponent: f64) -> Self {
        ScalarExpr::Pow { base: Box::new(self), exponent }
    }

    pub fn powi(self, exponent: i32) -> Self {
        self.pow(exponent as f64)
    }

    pub fn exp(self) -> Self {
        ScalarExpr::Exp { arg: Box::new(self) }
    }

    pub fn ln(self) -> Self {
        ScalarExpr::Ln { arg: Box::new(self) }
    }

    pub fn sin(self) -> Self {
        ScalarExpr::Sin { arg: Box::new(self) }
    }

    pub fn cos(self) -> Self {
        ScalarExpr::Cos { arg: Box::new(self) }
    }

    pub fn sinh(self) -> Self {
        ScalarExpr::Sinh { arg: Box::new(self) }
    }

    pub fn cosh(self) -> Self {
        ScalarExpr::Cosh { arg: Box::new(self) }
    }

    pub fn tanh(self) -> Self {
        ScalarExpr::Tanh { arg: Box::new(self) }
    }

    pub fn sqrt(self) -> Self {
        ScalarExpr::Sqrt { arg: Box::new(self) }
    }

    pub fn spline(coord: usize, knots: Arc<HermiteSpline>) -> Self {
        ScalarExpr::Spline { coord, knots }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, ScalarExpr::Const { .. })
    }

    /// Largest coordinate index referenced, if any.
    pub fn max_coord(&self) -> Option<usize> {
        match self {
            ScalarExpr::Const { .. } => None,
            ScalarExpr::Coord { index } => Some(*index),
            ScalarExpr::Add { args } | ScalarExpr::Mul { args } => {
                args.iter().filter_map(|a| a.max_coord()).max()
            }
            ScalarExpr::Div { num, den } => num.max_coord().into_iter().chain(den.max_coord()).max(),
            ScalarExpr::Pow { base, .. } => base.max_coord(),
            ScalarExpr::Neg { arg }
            | ScalarExpr::Exp { arg }
            | ScalarExpr::Ln { arg }
            | ScalarExpr::Sin { arg }
            | ScalarExpr::Cos { arg }
            | ScalarExpr::Sinh { arg }
            | ScalarExpr::Cosh { arg }
            | ScalarExpr::Tanh { arg }
            | ScalarExpr::Sqrt { arg } => arg.max_coord(),
            ScalarExpr::Spline { coord, .. } => Some(*coord),
        }
    }

    /// Rewrite every coordinate index `i` as `i + offset`. Used when lifting
    /// fiber expressions into a product chart.
    pub fn shift_coords(&self, offset: usize) -> ScalarExpr {
        let sh = |e: &ScalarExpr| Box::new(e.shift_coords(offset));
        match self {
            ScalarExpr::Const { value } => ScalarExpr::Const { value: *value },
            ScalarExpr::Coord { index } => ScalarExpr::Coord { index: index + offset },
            ScalarExpr::Add { args } => ScalarExpr::Add {
                args: args.iter().map(|a| a.shift_coords(offset)).collect(),
            },
            ScalarExpr::Mul { args } => ScalarExpr::Mul {
                args: args.iter().map(|a| a.shift_coords(offset)).collect(),
            },
            ScalarExpr::Div { num, den } => ScalarExpr::Div { num: sh(num), den: sh(den) },
            ScalarExpr::Pow { base, exponent } => {
                ScalarExpr::Pow { base: sh(base), exponent: *exponent }
            }
            ScalarExpr::Neg { arg } => ScalarExpr::Neg { arg: sh(arg) },
            ScalarExpr::Exp { arg } => ScalarExpr::Exp { arg: sh(arg) },
            ScalarExpr::Ln { arg } => ScalarExpr::Ln { arg: sh(arg) },
            ScalarExpr::Sin { arg } => ScalarExpr::Sin { arg: sh(arg) },
            ScalarExpr::Cos { arg } => ScalarExpr::Cos { arg: sh(arg) },
            ScalarExpr::Sinh { arg } => ScalarExpr::Sinh { arg: sh(arg) },
            ScalarExpr::Cosh { arg } => ScalarExpr::Cosh { arg: sh(arg) },
            ScalarExpr::Tanh { arg } => ScalarExpr::Tanh { arg: sh(arg) },
            ScalarExpr::Sqrt { arg } => ScalarExpr::Sqrt { arg: sh(arg) },
            ScalarExpr::Spline { coord, knots } => {
                ScalarExpr::Spline { coord: coord + offset, knots: knots.clone() }
            }
        }
    }
}

impl Add for ScalarExpr {
    type Output = ScalarExpr;
    fn add(self, rhs: ScalarExpr) -> ScalarExpr {
        match (self, rhs) {
            (ScalarExpr::Add { mut args }, ScalarExpr::Add { args: more }) => {
                args.extend(more);
                ScalarExpr::Add { args }
            }
            (ScalarExpr::Add { mut args }, r) => {
                args.push(r);
                ScalarExpr::Add { args }
            }
            (l, r) => ScalarExpr::Add { args: vec![l, r] },
        }
    }
}

impl Sub for ScalarExpr {
    type Output = ScalarExpr;
    fn sub(self, rhs: ScalarExpr) -> ScalarExpr {
        self + (-rhs)
    }
}

impl Mul for ScalarExpr {
    type Output = ScalarExpr;
    fn mul(self, rhs: ScalarExpr) -> ScalarExpr {
        match (self, rhs) {
            (ScalarExpr::Mul { mut args }, ScalarExpr::Mul { args: more }) => {
                args.extend(more);
                ScalarExpr::Mul { args }
            }
            (ScalarExpr::Mul { mut args }, r) => {
                args.push(r);
                ScalarExpr::Mul { args }
            }
            (l, r) => ScalarExpr::Mul { args: vec![l, r] },
        }
    }
}

impl Div for ScalarExpr {
    type Output = ScalarExpr;
    fn div(self, rhs: ScalarExpr) -> ScalarExpr {
        ScalarExpr::Div { num: Box::new(self), den: Box::new(rhs) }
    }
}

impl Neg for ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        ScalarExpr::Neg { arg: Box::new(self) }
    }
}

impl Mul<f64> for ScalarExpr {
    type Output = ScalarExpr;
    fn mul(self, rhs: f64) -> ScalarExpr {
        self * ScalarExpr::constant(rhs)
    }
}
