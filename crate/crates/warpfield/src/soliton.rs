//! Pointwise verification of the soliton equation Hess h = (R - rho) g,
//! rho fitting, and the gradient/curvature identities that hold on any
//! verified soliton.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::{
    covariant_hessian, curvature_sample, gradient_and_laplacian, scalar_curvature,
    scalar_curvature_partials,
};
use crate::error::{GeomError, Result};
use crate::expr::ScalarExpr;
use crate::metric::MetricField;
use crate::tol::Tolerances;
use crate::warped::WarpedSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolitonClass {
    Steady,
    Shrinking,
    Expanding,
}

impl SolitonClass {
    pub fn from_rho(rho: f64) -> SolitonClass {
        if rho > 0.0 {
            SolitonClass::Shrinking
        } else if rho < 0.0 {
            SolitonClass::Expanding
        } else {
            SolitonClass::Steady
        }
    }
}

/// Either a plain chart metric or a warped product to be assembled.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    Metric(MetricField),
    Warped(WarpedSpec),
}

impl Geometry {
    pub fn metric(&self, tol: &Tolerances) -> Result<MetricField> {
        match self {
            Geometry::Metric(m) => Ok(m.clone()),
            Geometry::Warped(w) => w.assemble(tol),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Geometry::Metric(m) => m.dim(),
            Geometry::Warped(w) => w.base_dim() + w.fiber_dim(),
        }
    }
}

/// Geometry plus potential and soliton constant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolitonInstance {
    pub geometry: Geometry,
    pub potential: ScalarExpr,
    pub rho: f64,
    pub declared_class: Option<SolitonClass>,
}

impl SolitonInstance {
    pub fn new(geometry: Geometry, potential: ScalarExpr, rho: f64) -> SolitonInstance {
        SolitonInstance { geometry, potential, rho, declared_class: None }
    }

    /// The declared class, when present, must match the sign of rho.
    pub fn validate_class(&self) -> Result<()> {
        match self.declared_class {
            Some(c) if c != SolitonClass::from_rho(self.rho) => Err(GeomError::InvalidInput(
                format!("declared class {c:?} contradicts rho = {}", self.rho),
            )),
            _ => Ok(()),
        }
    }
}

/// Per-point soliton residuals in the g-normalized Frobenius norm.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub points: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    /// |grad h| < triviality threshold at every sampled point.
    pub trivial: bool,
}

impl ResidualReport {
    /// CSV with one row per sample point: coordinates, then the residual.
    pub fn to_csv(&self) -> String {
        let dim = self.points.first().map_or(0, |p| p.len());
        let mut out = String::new();
        for i in 0..dim {
            out.push_str(&format!("x{i},"));
        }
        out.push_str("residual\n");
        for (p, r) in self.points.iter().zip(&self.residuals) {
            for x in p {
                out.push_str(&format!("{x:.11e},"));
            }
            out.push_str(&format!("{r:.11e}\n"));
        }
        out
    }
}

fn residual_at(
    metric: &MetricField,
    h: &ScalarExpr,
    rho: f64,
    point: &[f64],
    tol: &Tolerances,
) -> Result<(f64, f64)> {
    let mj = metric.jets_at(point, tol.spd_pivot_ratio)?;
    let hess = covariant_hessian(metric, h, point, tol)?;
    let r = scalar_curvature(metric, point, tol)?;
    let defect = &mj.g_inv * (hess - (r - rho) * &mj.g);
    let residual = defect.iter().map(|v| v * v).sum::<f64>().sqrt();
    let (_, grad_sq, _) = gradient_and_laplacian(metric, h, point, tol)?;
    Ok((residual, grad_sq.max(0.0).sqrt()))
}

/// Residual of Hess h - (R - rho) g over a grid.
pub fn residual(inst: &SolitonInstance, grid: &[Vec<f64>], tol: &Tolerances) -> Result<ResidualReport> {
    inst.validate_class()?;
    let metric = inst.geometry.metric(tol)?;
    let rows: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|p| residual_at(&metric, &inst.potential, inst.rho, p, tol))
        .collect::<Result<_>>()?;
    let residuals: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
    let trivial = rows.iter().all(|r| r.1 < tol.triviality);
    Ok(ResidualReport { points: grid.to_vec(), residuals, max_residual, trivial })
}

/// Fit rho from the trace relation Delta h = dim * (R - rho):
/// rho_hat is the grid mean of R - Delta h / dim, reported with the residual
/// achieved at rho_hat.
pub fn fit_rho(
    geometry: &Geometry,
    h: &ScalarExpr,
    grid: &[Vec<f64>],
    tol: &Tolerances,
) -> Result<(f64, f64)> {
    if grid.is_empty() {
        return Err(GeomError::InvalidInput("empty grid".into()));
    }
    let metric = geometry.metric(tol)?;
    let dim = metric.dim() as f64;
    let estimates: Vec<f64> = grid
        .par_iter()
        .map(|p| {
            let r = scalar_curvature(&metric, p, tol)?;
            let (_, _, lap) = gradient_and_laplacian(&metric, h, p, tol)?;
            Ok(r - lap / dim)
        })
        .collect::<Result<_>>()?;
    let rho_hat = estimates.iter().sum::<f64>() / estimates.len() as f64;
    let report = residual(
        &SolitonInstance::new(geometry.clone(), h.clone(), rho_hat),
        grid,
        tol,
    )?;
    Ok((rho_hat, report.max_residual))
}

/// Max over the grid of |Delta h - dim (R - rho)|.
pub fn trace_identity_check(
    inst: &SolitonInstance,
    grid: &[Vec<f64>],
    tol: &Tolerances,
) -> Result<f64> {
    let metric = inst.geometry.metric(tol)?;
    let dim = metric.dim() as f64;
    grid.par_iter()
        .map(|p| {
            let r = scalar_curvature(&metric, p, tol)?;
            let (_, _, lap) = gradient_and_laplacian(&metric, &inst.potential, p, tol)?;
            Ok((lap - dim * (r - inst.rho)).abs())
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

fn g_norm(g: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    (g * v).dot(v).max(0.0).sqrt()
}

/// Max g-norm deviation of grad(|grad h|^2) - 2 (R - rho) grad h over the
/// grid. The |grad h|^2 derivative is taken by central finite differences.
pub fn gradient_identity_check(
    inst: &SolitonInstance,
    grid: &[Vec<f64>],
    tol: &Tolerances,
) -> Result<f64> {
    let metric = inst.geometry.metric(tol)?;
    let d = metric.dim();
    let step = tol.fd_step;
    grid.par_iter()
        .map(|p| {
            let mj = metric.jets_at(p, tol.spd_pivot_ratio)?;
            let mut d_norm_sq = DVector::zeros(d);
            let mut q = p.clone();
            for c in 0..d {
                q[c] = p[c] + step;
                let (_, plus, _) = gradient_and_laplacian(&metric, &inst.potential, &q, tol)?;
                q[c] = p[c] - step;
                let (_, minus, _) = gradient_and_laplacian(&metric, &inst.potential, &q, tol)?;
                q[c] = p[c];
                d_norm_sq[c] = (plus - minus) / (2.0 * step);
            }
            let lhs = &mj.g_inv * d_norm_sq;
            let r = scalar_curvature(&metric, p, tol)?;
            let (grad_h, _, _) = gradient_and_laplacian(&metric, &inst.potential, p, tol)?;
            let rhs = 2.0 * (r - inst.rho) * grad_h;
            Ok(g_norm(&mj.g, &(lhs - rhs)))
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

fn commutation_at(
    metric: &MetricField,
    h: &ScalarExpr,
    point: &[f64],
    x: &DVector<f64>,
    y: &DVector<f64>,
    tol: &Tolerances,
) -> Result<f64> {
    let d = metric.dim();
    let sample = curvature_sample(metric, point, false, tol)?;
    let mj = metric.jets_at(point, tol.spd_pivot_ratio)?;
    let (grad_h, _, _) = gradient_and_laplacian(metric, h, point, tol)?;
    let dr = scalar_curvature_partials(metric, point, tol)?;
    let grad_r = &mj.g_inv * &dr;

    // R(x, grad h) y
    let mut lhs = DVector::zeros(d);
    for l in 0..d {
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    s += sample.riemann[l][i][j][k] * x[i] * grad_h[j] * y[k];
                }
            }
        }
        lhs[l] = s;
    }
    // y(R) x - g(x, y) grad R
    let y_of_r = dr.dot(y);
    let gxy = (&mj.g * x).dot(y);
    let rhs = y_of_r * x - gxy * grad_r;
    Ok(g_norm(&mj.g, &(lhs - rhs)))
}

/// Max deviation of R(X, grad h) Y = Y(R) X - g(X, Y) grad R over the grid
/// for the given coordinate direction pairs.
pub fn curvature_commutation_check(
    inst: &SolitonInstance,
    grid: &[Vec<f64>],
    pairs: &[(usize, usize)],
    tol: &Tolerances,
) -> Result<f64> {
    let metric = inst.geometry.metric(tol)?;
    let d = metric.dim();
    grid.par_iter()
        .map(|p| {
            let mut worst: f64 = 0.0;
            for &(a, b) in pairs {
                if a >= d || b >= d {
                    return Err(GeomError::InvalidInput(format!(
                        "direction pair ({a},{b}) out of range for dimension {d}"
                    )));
                }
                let mut x = DVector::zeros(d);
                let mut y = DVector::zeros(d);
                x[a] = 1.0;
                y[b] = 1.0;
                worst = worst.max(commutation_at(&metric, &inst.potential, p, &x, &y, tol)?);
            }
            Ok(worst)
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

/// The X = Y = grad h special case of the commutation identity, which
/// reduces to grad h(R) grad h = |grad h|^2 grad R.
pub fn fe5_check(inst: &SolitonInstance, grid: &[Vec<f64>], tol: &Tolerances) -> Result<f64> {
    let metric = inst.geometry.metric(tol)?;
    grid.par_iter()
        .map(|p| {
            let (grad_h, _, _) = gradient_and_laplacian(&metric, &inst.potential, p, tol)?;
            commutation_at(&metric, &inst.potential, p, &grad_h, &grad_h, tol)
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

/// Least-squares fit of Hess f = c f g_B over all grid points and index
/// pairs, reporting the fitted c and the worst g-normalized deviation.
/// Nontrivial verified solitons must make this infeasible for nonzero c.
pub fn hess_f_proportionality(
    base: &MetricField,
    f: &ScalarExpr,
    grid: &[Vec<f64>],
    tol: &Tolerances,
) -> Result<(f64, f64)> {
    if grid.is_empty() {
        return Err(GeomError::InvalidInput("empty grid".into()));
    }
    let d = base.dim();
    // accumulate <Hess f, f g> and <f g, f g> entrywise
    let mut num = 0.0;
    let mut den = 0.0;
    let mut rows = Vec::with_capacity(grid.len());
    for p in grid {
        let fv = crate::jet::eval_value(f, p)?;
        if fv <= 0.0 {
            return Err(GeomError::Positivity(format!("f is {fv} at {p:?}")));
        }
        let mj = base.jets_at(p, tol.spd_pivot_ratio)?;
        let hess = covariant_hessian(base, f, p, tol)?;
        for i in 0..d {
            for j in 0..d {
                let target = fv * mj.g[(i, j)];
                num += hess[(i, j)] * target;
                den += target * target;
            }
        }
        rows.push((hess, mj, fv));
    }
    let c = num / den;
    let mut worst: f64 = 0.0;
    for (hess, mj, fv) in &rows {
        let defect = &mj.g_inv * (hess - c * *fv * &mj.g);
        worst = worst.max(defect.iter().map(|v| v * v).sum::<f64>().sqrt());
    }
    Ok((c, worst))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ScalarExpr as E;
    use crate::grid::uniform_grid;
    use crate::metric::DomainBox;
    use approx::assert_abs_diff_eq;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn punctured_euclidean(n: usize, rho: f64) -> WarpedSpec {
        let base = MetricField::diagonal(
            vec![E::constant(1.0)],
            DomainBox::new(vec![(0.4, 5.1)]).unwrap(),
            false,
        )
        .unwrap();
        WarpedSpec::new(base, MetricField::round_sphere(n - 1).unwrap(), E::coord(0), Some(rho))
    }

    fn half_r_squared(scale: f64) -> ScalarExpr {
        E::coord(0).powi(2) * E::constant(0.5 * scale)
    }

    #[test]
    fn punctured_euclidean_three_is_verified() {
        let spec = punctured_euclidean(3, 1.0);
        let total = spec.assemble(&tol()).unwrap();
        let inst = SolitonInstance::new(Geometry::Metric(total.clone()), half_r_squared(-1.0), 1.0);
        let grid = uniform_grid(&total.domain, 4, 0.02).unwrap();
        let rep = residual(&inst, &grid, &tol()).unwrap();
        assert!(rep.max_residual <= 1e-8, "max residual {}", rep.max_residual);
        assert!(!rep.trivial);
    }

    #[test]
    fn constant_potential_is_trivial() {
        let g = MetricField::euclidean(2, DomainBox::new(vec![(-2.0, 2.0); 2]).unwrap()).unwrap();
        let inst = SolitonInstance::new(Geometry::Metric(g.clone()), E::constant(4.2), 0.0);
        let grid = uniform_grid(&g.domain, 4, 1e-3).unwrap();
        let rep = residual(&inst, &grid, &tol()).unwrap();
        assert_eq!(rep.max_residual, 0.0);
        assert!(rep.trivial);
    }

    #[test]
    fn class_mismatch_rejected() {
        let g = MetricField::euclidean(2, DomainBox::new(vec![(-2.0, 2.0); 2]).unwrap()).unwrap();
        let mut inst = SolitonInstance::new(Geometry::Metric(g), E::constant(0.0), 1.0);
        inst.declared_class = Some(SolitonClass::Expanding);
        assert!(inst.validate_class().is_err());
    }

    #[test]
    fn fit_rho_linear_potential_on_flat_space() {
        let g = MetricField::euclidean(3, DomainBox::new(vec![(-2.0, 2.0); 3]).unwrap()).unwrap();
        let grid = uniform_grid(&g.domain, 3, 1e-3).unwrap();
        let (rho, res) = fit_rho(&Geometry::Metric(g), &E::coord(0), &grid, &tol()).unwrap();
        assert_eq!(rho, 0.0);
        assert_eq!(res, 0.0);
    }

    #[test]
    fn fit_rho_recovers_scaled_family() {
        let spec = punctured_euclidean(3, 3.0);
        let total = spec.assemble(&tol()).unwrap();
        let grid = uniform_grid(&total.domain, 4, 0.02).unwrap();
        let (rho, res) =
            fit_rho(&Geometry::Metric(total), &half_r_squared(-3.0), &grid, &tol()).unwrap();
        assert_abs_diff_eq!(rho, 3.0, epsilon = 1e-8);
        assert!(res <= 1e-8);
    }

    #[test]
    fn trace_identity_on_verified_soliton() {
        let spec = punctured_euclidean(3, 1.0);
        let total = spec.assemble(&tol()).unwrap();
        let inst = SolitonInstance::new(Geometry::Metric(total.clone()), half_r_squared(-1.0), 1.0);
        let grid = uniform_grid(&total.domain, 4, 0.02).unwrap();
        assert!(trace_identity_check(&inst, &grid, &tol()).unwrap() <= 1e-8);
    }

    #[test]
    fn gradient_identity_on_punctured_euclidean() {
        let spec = punctured_euclidean(2, 1.0);
        let total = spec.assemble(&tol()).unwrap();
        let inst = SolitonInstance::new(Geometry::Metric(total.clone()), half_r_squared(-1.0), 1.0);
        let grid = uniform_grid(&total.domain, 5, 0.02).unwrap();
        let dev = gradient_identity_check(&inst, &grid, &tol()).unwrap();
        assert!(dev <= 1e-5, "deviation {dev}");
    }

    #[test]
    fn commutation_trivial_on_flat_space() {
        let spec = punctured_euclidean(3, 1.0);
        let total = spec.assemble(&tol()).unwrap();
        let inst = SolitonInstance::new(Geometry::Metric(total.clone()), half_r_squared(-1.0), 1.0);
        let grid = uniform_grid(&total.domain, 3, 0.02).unwrap();
        let pairs = [(0usize, 1usize), (1, 2), (0, 2)];
        let dev = curvature_commutation_check(&inst, &grid, &pairs, &tol()).unwrap();
        assert!(dev <= 1e-6, "deviation {dev}");
    }

    #[test]
    fn cigar_commutation_and_fe5() {
        let g = MetricField::diagonal(
            vec![E::constant(1.0), E::coord(0).tanh().powi(2)],
            DomainBox::new(vec![(0.4, 3.1), (0.5, 6.0)]).unwrap(),
            false,
        )
        .unwrap();
        let h = E::coord(0).cosh().ln() * E::constant(4.0);
        let inst = SolitonInstance::new(Geometry::Metric(g.clone()), h, 0.0);
        let grid = uniform_grid(&g.domain, 5, 0.02).unwrap();
        let rep = residual(&inst, &grid, &tol()).unwrap();
        assert!(rep.max_residual <= 1e-6);
        let dev = curvature_commutation_check(&inst, &grid, &[(0, 1)], &tol()).unwrap();
        assert!(dev <= 1e-4, "commutation deviation {dev}");
        let dev5 = fe5_check(&inst, &grid, &tol()).unwrap();
        assert!(dev5 <= 1e-4, "fe5 deviation {dev5}");
    }

    #[test]
    fn cigar_candidate_two_fails() {
        let g = MetricField::diagonal(
            vec![E::constant(1.0), E::coord(0).tanh().powi(2)],
            DomainBox::new(vec![(0.4, 3.1), (0.5, 6.0)]).unwrap(),
            false,
        )
        .unwrap();
        let h = E::coord(0).cosh().ln() * E::constant(2.0);
        let inst = SolitonInstance::new(Geometry::Metric(g.clone()), h, 0.0);
        let grid = uniform_grid(&g.domain, 5, 0.02).unwrap();
        let rep = residual(&inst, &grid, &tol()).unwrap();
        assert!(rep.max_residual > 0.1, "max residual {}", rep.max_residual);
    }

    #[test]
    fn hess_f_proportionality_cosh() {
        let base = MetricField::euclidean(1, DomainBox::new(vec![(-2.0, 2.0)]).unwrap()).unwrap();
        let grid = uniform_grid(&base.domain, 15, 1e-3).unwrap();
        let (c, dev) = hess_f_proportionality(&base, &E::coord(0).cosh(), &grid, &tol()).unwrap();
        assert_abs_diff_eq!(c, 1.0, epsilon = 1e-10);
        assert!(dev <= 1e-8);
    }

    #[test]
    fn hess_f_proportionality_negative_control() {
        let base = MetricField::euclidean(2, DomainBox::new(vec![(-1.0, 1.0); 2]).unwrap()).unwrap();
        let grid = uniform_grid(&base.domain, 7, 1e-3).unwrap();
        let f = (E::coord(0).powi(2) + E::coord(1).powi(2)) * E::constant(0.25) + E::constant(1.0);
        let (_, dev) = hess_f_proportionality(&base, &f, &grid, &tol()).unwrap();
        assert!(dev > 0.1, "deviation {dev}");
    }
}
