//! Pointwise curvature machinery on a single chart: Christoffel symbols,
//! Riemann/Ricci/scalar curvature, covariant Hessian, gradient, Laplacian
//! and the finite-difference scalar-curvature gradient.
//!
//! Convention: `riemann[l][i][j][k]` is the coefficient of d_l in
//! R(d_i, d_j) d_k, i.e.
//!
//! ```text
//! R^l_ijk = d_i Gamma^l_jk - d_j Gamma^l_ik
//!         + Gamma^l_ia Gamma^a_jk - Gamma^l_ja Gamma^a_ik
//! ```
//!
//! with Ric_jk = R^i_ijk. This makes the unit round sphere come out with
//! scalar curvature k(k-1) > 0.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::expr::ScalarExpr;
use crate::jet::eval_grad_hess_raw;
use crate::metric::{MetricField, MetricJets};
use crate::tol::Tolerances;

/// Per-point curvature symbols.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurvatureSample {
    pub point: Vec<f64>,
    /// christoffel[k][i][j] = Gamma^k_ij
    pub christoffel: Vec<Vec<Vec<f64>>>,
    /// riemann[l][i][j][k] = R^l_ijk
    pub riemann: Vec<Vec<Vec<Vec<f64>>>>,
    pub ricci: Vec<Vec<f64>>,
    pub scalar: f64,
    /// Raised gradient of scalar curvature (finite-difference), when requested.
    pub scalar_gradient: Option<Vec<f64>>,
}

/// Gamma^k_ij as one matrix per upper index k.
pub fn christoffel_from_jets(mj: &MetricJets) -> Vec<DMatrix<f64>> {
    let d = mj.g.nrows();
    let mut gamma = vec![DMatrix::zeros(d, d); d];
    for k in 0..d {
        for i in 0..d {
            for j in i..d {
                let mut s = 0.0;
                for l in 0..d {
                    s += mj.g_inv[(k, l)]
                        * (mj.dg[i][(j, l)] + mj.dg[j][(i, l)] - mj.dg[l][(i, j)]);
                }
                gamma[k][(i, j)] = 0.5 * s;
                gamma[k][(j, i)] = 0.5 * s;
            }
        }
    }
    gamma
}

/// Coordinate derivatives d_m Gamma^k_ij, from second metric jets.
fn christoffel_derivatives(mj: &MetricJets) -> Vec<Vec<DMatrix<f64>>> {
    let d = mj.g.nrows();
    // d_m g^{kl} = -(g^-1 dg[m] g^-1)_{kl}
    let dginv: Vec<DMatrix<f64>> =
        (0..d).map(|m| -(&mj.g_inv * &mj.dg[m] * &mj.g_inv)).collect();
    let mut dgamma = vec![vec![DMatrix::zeros(d, d); d]; d];
    for m in 0..d {
        for k in 0..d {
            for i in 0..d {
                for j in i..d {
                    let mut s = 0.0;
                    for l in 0..d {
                        s += dginv[m][(k, l)]
                            * (mj.dg[i][(j, l)] + mj.dg[j][(i, l)] - mj.dg[l][(i, j)]);
                        s += mj.g_inv[(k, l)]
                            * (mj.ddg[m][i][(j, l)] + mj.ddg[m][j][(i, l)]
                                - mj.ddg[m][l][(i, j)]);
                    }
                    dgamma[m][k][(i, j)] = 0.5 * s;
                    dgamma[m][k][(j, i)] = 0.5 * s;
                }
            }
        }
    }
    dgamma
}

/// Christoffel symbols at a point.
pub fn christoffel(metric: &MetricField, point: &[f64], tol: &Tolerances) -> Result<Vec<DMatrix<f64>>> {
    Ok(christoffel_from_jets(&metric.jets_at(point, tol.spd_pivot_ratio)?))
}

struct CurvatureParts {
    gamma: Vec<DMatrix<f64>>,
    riemann: Vec<Vec<Vec<Vec<f64>>>>,
    ricci: DMatrix<f64>,
    scalar: f64,
    jets: MetricJets,
}

fn curvature_parts(metric: &MetricField, point: &[f64], tol: &Tolerances) -> Result<CurvatureParts> {
    let mj = metric.jets_at(point, tol.spd_pivot_ratio)?;
    let d = metric.dim();
    let gamma = christoffel_from_jets(&mj);
    let dgamma = christoffel_derivatives(&mj);
    let mut riemann = vec![vec![vec![vec![0.0; d]; d]; d]; d];
    for l in 0..d {
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let mut s = dgamma[i][l][(j, k)] - dgamma[j][l][(i, k)];
                    for a in 0..d {
                        s += gamma[l][(i, a)] * gamma[a][(j, k)]
                            - gamma[l][(j, a)] * gamma[a][(i, k)];
                    }
                    riemann[l][i][j][k] = s;
                }
            }
        }
    }
    let mut ricci = DMatrix::zeros(d, d);
    for j in 0..d {
        for k in 0..d {
            let mut s = 0.0;
            for l in 0..d {
                s += riemann[l][l][j][k];
            }
            ricci[(j, k)] = s;
        }
    }
    let mut scalar = 0.0;
    for j in 0..d {
        for k in 0..d {
            scalar += mj.g_inv[(j, k)] * ricci[(j, k)];
        }
    }
    Ok(CurvatureParts { gamma, riemann, ricci, scalar, jets: mj })
}

/// Scalar curvature only.
pub fn scalar_curvature(metric: &MetricField, point: &[f64], tol: &Tolerances) -> Result<f64> {
    Ok(curvature_parts(metric, point, tol)?.scalar)
}

/// Coordinate partials of scalar curvature by central finite differences,
/// step `tol.fd_step`. Documented accuracy ~1e-6 relative.
pub fn scalar_curvature_partials(
    metric: &MetricField,
    point: &[f64],
    tol: &Tolerances,
) -> Result<DVector<f64>> {
    let d = metric.dim();
    let h = tol.fd_step;
    let mut dr = DVector::zeros(d);
    let mut p = point.to_vec();
    for c in 0..d {
        p[c] = point[c] + h;
        let plus = scalar_curvature(metric, &p, tol)?;
        p[c] = point[c] - h;
        let minus = scalar_curvature(metric, &p, tol)?;
        p[c] = point[c];
        dr[c] = (plus - minus) / (2.0 * h);
    }
    Ok(dr)
}

/// Full curvature sample, optionally with the raised scalar-curvature gradient.
pub fn curvature_sample(
    metric: &MetricField,
    point: &[f64],
    with_scalar_gradient: bool,
    tol: &Tolerances,
) -> Result<CurvatureSample> {
    let parts = curvature_parts(metric, point, tol)?;
    let d = metric.dim();
    let scalar_gradient = if with_scalar_gradient {
        let dr = scalar_curvature_partials(metric, point, tol)?;
        let raised = &parts.jets.g_inv * dr;
        Some(raised.iter().cloned().collect())
    } else {
        None
    };
    let christoffel = (0..d)
        .map(|k| (0..d).map(|i| (0..d).map(|j| parts.gamma[k][(i, j)]).collect()).collect())
        .collect();
    let ricci = (0..d)
        .map(|j| (0..d).map(|k| parts.ricci[(j, k)]).collect())
        .collect();
    Ok(CurvatureSample {
        point: point.to_vec(),
        christoffel,
        riemann: parts.riemann,
        ricci,
        scalar: parts.scalar,
        scalar_gradient,
    })
}

/// Covariant Hessian of `h`: Hess_ij = d_i d_j h - Gamma^k_ij d_k h.
pub fn covariant_hessian(
    metric: &MetricField,
    h: &ScalarExpr,
    point: &[f64],
    tol: &Tolerances,
) -> Result<DMatrix<f64>> {
    let mj = metric.jets_at(point, tol.spd_pivot_ratio)?;
    let gamma = christoffel_from_jets(&mj);
    let (_, grad, hess) = eval_grad_hess_raw(h, point)?;
    let d = metric.dim();
    let mut out = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let mut s = hess[(i, j)];
            for k in 0..d {
                s -= gamma[k][(i, j)] * grad[k];
            }
            out[(i, j)] = s;
            out[(j, i)] = s;
        }
    }
    Ok(out)
}

/// Raised gradient, squared gradient norm and Laplace-Beltrami of `h`.
pub fn gradient_and_laplacian(
    metric: &MetricField,
    h: &ScalarExpr,
    point: &[f64],
    tol: &Tolerances,
) -> Result<(DVector<f64>, f64, f64)> {
    let mj = metric.jets_at(point, tol.spd_pivot_ratio)?;
    let (_, grad, _) = eval_grad_hess_raw(h, point)?;
    let raised = &mj.g_inv * &grad;
    let norm_sq = grad.dot(&raised);
    let hess = covariant_hessian(metric, h, point, tol)?;
    let mut lap = 0.0;
    let d = metric.dim();
    for i in 0..d {
        for j in 0..d {
            lap += mj.g_inv[(i, j)] * hess[(i, j)];
        }
    }
    Ok((raised, norm_sq, lap))
}

/// Sectional curvature of the coordinate plane spanned by axes `i`, `j`.
pub fn sectional_curvature(
    metric: &MetricField,
    point: &[f64],
    i: usize,
    j: usize,
    tol: &Tolerances,
) -> Result<f64> {
    if i == j {
        return Err(GeomError::InvalidInput("sectional plane needs two distinct axes".into()));
    }
    let parts = curvature_parts(metric, point, tol)?;
    let d = metric.dim();
    // g(R(e_i, e_j) e_j, e_i)
    let mut num = 0.0;
    for l in 0..d {
        num += parts.jets.g[(l, i)] * parts.riemann[l][i][j][j];
    }
    let den = parts.jets.g[(i, i)] * parts.jets.g[(j, j)] - parts.jets.g[(i, j)].powi(2);
    if den.abs() < 1e-300 {
        return Err(GeomError::InvalidInput("degenerate coordinate plane".into()));
    }
    Ok(num / den)
}
