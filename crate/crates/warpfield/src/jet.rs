//! Truncated-Taylor (jet) arithmetic: exact values with first and second
//! directional derivatives along a probed pair of directions.
//!
//! A `Jet2` carries f(p), D_u f(p), D_v f(p) and the mixed second derivative
//! D_u D_v f(p). Propagating jets through an expression tree yields these
//! four numbers exact to machine rounding; no truncation error.

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};
use crate::expr::ScalarExpr;

/// Value plus first/second directional derivatives along directions (u, v).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub du: f64,
    pub dv: f64,
    pub duv: f64,
}

impl Jet2 {
    pub fn constant(v: f64) -> Jet2 {
        Jet2 { v, du: 0.0, dv: 0.0, duv: 0.0 }
    }

    fn add(self, o: Jet2) -> Jet2 {
        Jet2 { v: self.v + o.v, du: self.du + o.du, dv: self.dv + o.dv, duv: self.duv + o.duv }
    }

    fn mul(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v * o.v,
            du: self.du * o.v + self.v * o.du,
            dv: self.dv * o.v + self.v * o.dv,
            duv: self.duv * o.v + self.du * o.dv + self.dv * o.du + self.v * o.duv,
        }
    }

    fn neg(self) -> Jet2 {
        Jet2 { v: -self.v, du: -self.du, dv: -self.dv, duv: -self.duv }
    }

    /// Chain rule through a scalar function with value `f0`, derivative `f1`
    /// and second derivative `f2` at `self.v`.
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Jet2 {
        Jet2 {
            v: f0,
            du: f1 * self.du,
            dv: f1 * self.dv,
            duv: f1 * self.duv + f2 * self.du * self.dv,
        }
    }

    fn recip(self) -> Result<Jet2> {
        if self.v == 0.0 {
            return Err(GeomError::Domain("division by zero".into()));
        }
        let inv = 1.0 / self.v;
        Ok(self.chain(inv, -inv * inv, 2.0 * inv * inv * inv))
    }

    /// Integer power by repeated multiplication; valid for any base value.
    fn powi(self, mut e: i64) -> Result<Jet2> {
        if e < 0 {
            return self.powi(-e)?.recip();
        }
        let mut acc = Jet2::constant(1.0);
        let mut base = self;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            e >>= 1;
        }
        Ok(acc)
    }
}

fn eval(expr: &ScalarExpr, point: &[f64], u: &[f64], v: &[f64]) -> Result<Jet2> {
    match expr {
        ScalarExpr::Const { value } => Ok(Jet2::constant(*value)),
        ScalarExpr::Coord { index } => {
            if *index >= point.len() {
                return Err(GeomError::Domain(format!(
                    "coordinate index {index} out of range for a {}-dimensional chart",
                    point.len()
                )));
            }
            Ok(Jet2 { v: point[*index], du: u[*index], dv: v[*index], duv: 0.0 })
        }
        ScalarExpr::Add { args } => {
            let mut acc = Jet2::constant(0.0);
            for a in args {
                acc = acc.add(eval(a, point, u, v)?);
            }
            Ok(acc)
        }
        ScalarExpr::Mul { args } => {
            let mut acc = Jet2::constant(1.0);
            for a in args {
                acc = acc.mul(eval(a, point, u, v)?);
            }
            Ok(acc)
        }
        ScalarExpr::Div { num, den } => {
            let n = eval(num, point, u, v)?;
            let d = eval(den, point, u, v)?;
            Ok(n.mul(d.recip()?))
        }
        ScalarExpr::Pow { base, exponent } => {
            let b = eval(base, point, u, v)?;
            if exponent.fract() == 0.0 && exponent.abs() <= i64::MAX as f64 {
                b.powi(*exponent as i64)
            } else {
                if b.v <= 0.0 {
                    return Err(GeomError::Domain(format!(
                        "noninteger power of nonpositive base {}",
                        b.v
                    )));
                }
                let p = *exponent;
                let f0 = b.v.powf(p);
                Ok(b.chain(f0, p * f0 / b.v, p * (p - 1.0) * f0 / (b.v * b.v)))
            }
        }
        ScalarExpr::Neg { arg } => Ok(eval(arg, point, u, v)?.neg()),
        ScalarExpr::Exp { arg } => {
            let a = eval(arg, point, u, v)?;
            let e = a.v.exp();
            Ok(a.chain(e, e, e))
        }
        ScalarExpr::Ln { arg } => {
            let a = eval(arg, point, u, v)?;
            if a.v <= 0.0 {
                return Err(GeomError::Domain(format!("ln of nonpositive argument {}", a.v)));
            }
            Ok(a.chain(a.v.ln(), 1.0 / a.v, -1.0 / (a.v * a.v)))
        }
        ScalarExpr::Sin { arg } => {
            let a = eval(arg, point, u, v)?;
            Ok(a.chain(a.v.sin(), a.v.cos(), -a.v.sin()))
        }
        ScalarExpr::Cos { arg } => {
            let a = eval(arg, point, u, v)?;
            Ok(a.chain(a.v.cos(), -a.v.sin(), -a.v.cos()))
        }
        ScalarExpr::Sinh { arg } => {
            let a = eval(arg, point, u, v)?;
            Ok(a.chain(a.v.sinh(), a.v.cosh(), a.v.sinh()))
        }
        ScalarExpr::Cosh { arg } => {
            let a = eval(arg, point, u, v)?;
            Ok(a.chain(a.v.cosh(), a.v.sinh(), a.v.cosh()))
        }
        ScalarExpr::Tanh { arg } => {
            let a = eval(arg, point, u, v)?;
            let t = a.v.tanh();
            let sech2 = 1.0 - t * t;
            Ok(a.chain(t, sech2, -2.0 * t * sech2))
        }
        ScalarExpr::Sqrt { arg } => {
            let a = eval(arg, point, u, v)?;
            if a.v <= 0.0 {
                return Err(GeomError::Domain(format!("sqrt of nonpositive argument {}", a.v)));
            }
            let s = a.v.sqrt();
            Ok(a.chain(s, 0.5 / s, -0.25 / (s * a.v)))
        }
        ScalarExpr::Spline { coord, knots } => {
            if *coord >= point.len() {
                return Err(GeomError::Domain(format!(
                    "spline coordinate {coord} out of range for a {}-dimensional chart",
                    point.len()
                )));
            }
            let (f0, f1, f2) = knots.eval(point[*coord])?;
            let x = Jet2 { v: point[*coord], du: u[*coord], dv: v[*coord], duv: 0.0 };
            Ok(x.chain(f0, f1, f2))
        }
    }
}

/// Evaluate `expr` at `point` with directional probes `u`, `v`.
pub fn eval_jet2(expr: &ScalarExpr, point: &[f64], u: &[f64], v: &[f64]) -> Result<Jet2> {
    debug_assert_eq!(point.len(), u.len());
    debug_assert_eq!(point.len(), v.len());
    eval(expr, point, u, v)
}

/// Plain value, no derivatives.
pub fn eval_value(expr: &ScalarExpr, point: &[f64]) -> Result<f64> {
    let zero = vec![0.0; point.len()];
    Ok(eval(expr, point, &zero, &zero)?.v)
}

/// Value, full coordinate gradient and full coordinate second-derivative
/// matrix, assembled from jets over basis direction pairs.
pub fn eval_grad_hess_raw(
    expr: &ScalarExpr,
    point: &[f64],
) -> Result<(f64, DVector<f64>, DMatrix<f64>)> {
    let d = point.len();
    let mut value = 0.0;
    let mut grad = DVector::zeros(d);
    let mut hess = DMatrix::zeros(d, d);
    let mut ei = vec![0.0; d];
    let mut ej = vec![0.0; d];
    for i in 0..d {
        ei[i] = 1.0;
        for j in i..d {
            ej[j] = 1.0;
            let jet = eval(expr, point, &ei, &ej)?;
            if i == 0 && j == 0 {
                value = jet.v;
            }
            if j == i {
                grad[i] = jet.du;
            }
            hess[(i, j)] = jet.duv;
            hess[(j, i)] = jet.duv;
            ej[j] = 0.0;
        }
        ei[i] = 0.0;
    }
    if d == 0 {
        value = eval_value(expr, point)?;
    }
    Ok((value, grad, hess))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ScalarExpr as E;
    use approx::assert_abs_diff_eq;

    #[test]
    fn square_at_three() {
        let e = E::coord(0).powi(2);
        let j = eval_jet2(&e, &[3.0], &[1.0], &[1.0]).unwrap();
        assert_eq!((j.v, j.du, j.dv, j.duv), (9.0, 6.0, 6.0, 2.0));
    }

    #[test]
    fn cosh_at_one() {
        let e = E::coord(0).cosh();
        let j = eval_jet2(&e, &[1.0], &[1.0], &[1.0]).unwrap();
        assert_abs_diff_eq!(j.v, 1.543081, epsilon = 1e-6);
        assert_abs_diff_eq!(j.du, 1.175201, epsilon = 1e-6);
        assert_abs_diff_eq!(j.dv, 1.175201, epsilon = 1e-6);
        assert_abs_diff_eq!(j.duv, 1.543081, epsilon = 1e-6);
    }

    #[test]
    fn constant_has_zero_jets() {
        let e = E::constant(7.0);
        let j = eval_jet2(&e, &[0.3, -2.0], &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!((j.v, j.du, j.dv, j.duv), (7.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn bilinear_grad_hess() {
        let e = E::coord(0) * E::coord(1);
        let (v, g, h) = eval_grad_hess_raw(&e, &[2.0, 5.0]).unwrap();
        assert_eq!(v, 10.0);
        assert_eq!((g[0], g[1]), (5.0, 2.0));
        assert_eq!((h[(0, 0)], h[(0, 1)], h[(1, 0)], h[(1, 1)]), (0.0, 1.0, 1.0, 0.0));
    }

    #[test]
    fn log_of_sum() {
        let e = (E::coord(0) + E::coord(1) + E::coord(2)).ln();
        let (v, g, h) = eval_grad_hess_raw(&e, &[1.0, 1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(v, 3.0_f64.ln(), epsilon = 1e-15);
        for i in 0..3 {
            assert_abs_diff_eq!(g[i], 1.0 / 3.0, epsilon = 1e-15);
            for j in 0..3 {
                assert_abs_diff_eq!(h[(i, j)], -1.0 / 9.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn half_square_1d() {
        let e = E::coord(0).powi(2) * E::constant(0.5);
        let (v, g, h) = eval_grad_hess_raw(&e, &[4.0]).unwrap();
        assert_eq!((v, g[0], h[(0, 0)]), (8.0, 4.0, 1.0));
    }

    #[test]
    fn domain_errors() {
        assert!(eval_value(&E::coord(0).ln(), &[-1.0]).is_err());
        assert!(eval_value(&E::coord(0).sqrt(), &[0.0]).is_err());
        assert!(eval_value(&(E::constant(1.0) / E::coord(0)), &[0.0]).is_err());
        assert!(eval_value(&E::coord(0).pow(0.5), &[-2.0]).is_err());
    }

    #[test]
    fn negative_integer_power_of_negative_base() {
        let e = E::coord(0).powi(-3);
        let j = eval_jet2(&e, &[-2.0], &[1.0], &[1.0]).unwrap();
        assert_abs_diff_eq!(j.v, -1.0 / 8.0, epsilon = 1e-15);
        // d/dx x^-3 = -3 x^-4
        assert_abs_diff_eq!(j.du, -3.0 / 16.0, epsilon = 1e-15);
    }

    #[test]
    fn mixed_direction_symmetry() {
        let e = (E::coord(0) * E::coord(1)).sin() + E::coord(0).exp();
        let p = [0.4, -1.2];
        let u = [1.0, 0.5];
        let v = [-0.3, 2.0];
        let a = eval_jet2(&e, &p, &u, &v).unwrap();
        let b = eval_jet2(&e, &p, &v, &u).unwrap();
        assert_abs_diff_eq!(a.duv, b.duv, epsilon = 1e-12);
        assert_abs_diff_eq!(a.du, b.dv, epsilon = 1e-15);
    }
}
