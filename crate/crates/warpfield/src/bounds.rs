//! Sampled scalar-curvature and potential-growth bounds.
//!
//! The lower bound R >= -(n+m-1)C|A| (plus rho in the expanding case) and the
//! two-sided bound built from A1 = inf Ric_B(u,u), A2 = sup Hess_B h(u,u)
//! with u = grad h / |grad h| are evaluated on grids. C enters as an input:
//! the theorems only assert that some positive C works, so the report also
//! carries the critical C* below which the bound fails.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::{covariant_hessian, curvature_sample, gradient_and_laplacian, scalar_curvature};
use crate::error::{GeomError, Result};
use crate::expr::ScalarExpr;
use crate::jet::eval_grad_hess_raw;
use crate::metric::MetricField;
use crate::tol::Tolerances;
use crate::warped::WarpedSpec;

#[derive(Debug, Clone)]
pub struct BoundsConfig {
    /// Cutoff constant of the lower bounds; must be positive.
    pub c: f64,
    /// Base-chart sample points.
    pub grid: Vec<Vec<f64>>,
    /// Minimum |grad h| for unit-direction quantities; points below are
    /// skipped and counted.
    pub direction_floor: f64,
}

impl BoundsConfig {
    pub fn new(c: f64, grid: Vec<Vec<f64>>) -> Result<BoundsConfig> {
        if !(c > 0.0) {
            return Err(GeomError::InvalidInput("cutoff constant C must be positive".into()));
        }
        if grid.is_empty() {
            return Err(GeomError::InvalidInput("empty bounds grid".into()));
        }
        Ok(BoundsConfig { c, grid, direction_floor: 1e-8 })
    }
}

/// A grid extremum with its location and the number of skipped points.
#[derive(Debug, Clone, Serialize)]
pub struct SampledExtremum {
    pub value: f64,
    pub location: Vec<f64>,
    pub skipped: usize,
}

/// Unit-direction ingredients at one base point: Ric_B(u,u) and
/// Hess_B h(u,u), u = grad h / |grad h|. None when |grad h| is below floor.
fn direction_terms(
    base: &MetricField,
    h: &ScalarExpr,
    point: &[f64],
    floor: f64,
    tol: &Tolerances,
) -> Result<Option<(f64, f64)>> {
    let (raised, norm_sq, _) = gradient_and_laplacian(base, h, point, tol)?;
    if norm_sq.sqrt() <= floor {
        return Ok(None);
    }
    let u: DVector<f64> = raised / norm_sq.sqrt();
    let sample = curvature_sample(base, point, false, tol)?;
    let d = base.dim();
    let ricci = nalgebra::DMatrix::from_fn(d, d, |i, j| sample.ricci[i][j]);
    let hess = covariant_hessian(base, h, point, tol)?;
    let ric_uu = (u.transpose() * &ricci * &u)[(0, 0)];
    let hess_uu = (u.transpose() * &hess * &u)[(0, 0)];
    Ok(Some((ric_uu, hess_uu)))
}

/// Sampled infimum of (n+m-1)/(n-1) Ric_B(u,u) - Hess h(u,u)/(2(n+m-1)).
#[allow(non_snake_case)]
pub fn theorem5_A(
    spec: &WarpedSpec,
    h: &ScalarExpr,
    config: &BoundsConfig,
    tol: &Tolerances,
) -> Result<SampledExtremum> {
    let n = spec.base_dim();
    let m = spec.fiber_dim();
    if n < 2 {
        return Err(GeomError::Dimension(
            "the (n+m-1)/(n-1) factor needs base dimension n >= 2".into(),
        ));
    }
    let dim_factor = (n + m - 1) as f64 / (n - 1) as f64;
    let hess_factor = 1.0 / (2.0 * (n + m - 1) as f64);
    let terms: Vec<Option<(Vec<f64>, f64)>> = config
        .grid
        .par_iter()
        .map(|p| {
            Ok(direction_terms(&spec.base, h, p, config.direction_floor, tol)?
                .map(|(ric, hess)| (p.clone(), dim_factor * ric - hess_factor * hess)))
        })
        .collect::<Result<_>>()?;
    let skipped = terms.iter().filter(|t| t.is_none()).count();
    terms
        .into_iter()
        .flatten()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .map(|(location, value)| SampledExtremum { value, location, skipped })
        .ok_or_else(|| {
            GeomError::NoValidPoints("|grad h| below direction floor everywhere".into())
        })
}

/// Lower bound -(n+m-1)C|A|, plus rho in the expanding case.
pub fn theorem5_bound(a: f64, c: f64, n: usize, m: usize, rho: f64) -> f64 {
    let base = -((n + m - 1) as f64) * c * a.abs();
    if rho < 0.0 {
        base + rho
    } else {
        base
    }
}

/// Grid infimum of scalar curvature with its argmin.
pub fn empirical_scalar_inf(
    metric: &MetricField,
    grid: &[Vec<f64>],
    tol: &Tolerances,
) -> Result<(f64, Vec<f64>)> {
    if grid.is_empty() {
        return Err(GeomError::InvalidInput("empty grid".into()));
    }
    let values: Vec<(f64, &Vec<f64>)> = grid
        .par_iter()
        .map(|p| Ok((scalar_curvature(metric, p, tol)?, p)))
        .collect::<Result<_>>()?;
    let (inf, argmin) = values
        .into_iter()
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        .unwrap();
    Ok((inf, argmin.clone()))
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    /// None when the grid had no usable direction (constant potential).
    pub a: Option<f64>,
    pub a_location: Option<Vec<f64>>,
    pub skipped: usize,
    pub c: f64,
    pub bound: f64,
    pub inf_scalar: f64,
    pub inf_scalar_location: Vec<f64>,
    pub satisfied: bool,
    pub margin: f64,
    /// Smallest C making the bound hold; -inf when it holds for every C
    /// (A = 0), +inf when no C can help.
    pub c_star: f64,
    /// Completeness of the base chart as declared, not verified.
    pub hypothesis_complete_base: bool,
    /// Set when A degenerated to the empty infimum.
    pub degenerate: bool,
}

/// Compose theorem5_A, theorem5_bound and the empirical scalar infimum on
/// the assembled metric over the lifted base grid.
pub fn bound_report(
    spec: &WarpedSpec,
    h: &ScalarExpr,
    rho: f64,
    config: &BoundsConfig,
    tol: &Tolerances,
) -> Result<BoundReport> {
    let n = spec.base_dim();
    let m = spec.fiber_dim();
    let (a, degenerate) = match theorem5_A(spec, h, config, tol) {
        Ok(e) => (e, false),
        Err(GeomError::NoValidPoints(_)) => (
            // constant potential: the infimum ranges over the empty set and
            // the bound degenerates to the A = 0 case
            SampledExtremum { value: 0.0, location: vec![], skipped: config.grid.len() },
            true,
        ),
        Err(e) => return Err(e),
    };
    let total = spec.assemble(tol)?;
    let lifted: Vec<Vec<f64>> = config.grid.iter().map(|p| spec.product_point(p)).collect();
    let (inf_scalar, inf_loc) = empirical_scalar_inf(&total, &lifted, tol)?;
    let bound = theorem5_bound(a.value, config.c, n, m, rho);
    let satisfied = inf_scalar >= bound - 1e-9;
    let rho_shift = if rho < 0.0 { rho } else { 0.0 };
    let c_star = if a.value.abs() == 0.0 {
        if inf_scalar >= rho_shift - 1e-9 {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    } else {
        ((rho_shift - inf_scalar) / (((n + m - 1) as f64) * a.value.abs())).max(0.0)
    };
    Ok(BoundReport {
        a: if degenerate { None } else { Some(a.value) },
        a_location: if degenerate { None } else { Some(a.location) },
        skipped: a.skipped,
        c: config.c,
        bound,
        inf_scalar,
        inf_scalar_location: inf_loc,
        satisfied,
        margin: inf_scalar - bound,
        c_star,
        hypothesis_complete_base: spec.base.complete,
        degenerate,
    })
}

/// (A1, A2) = (inf Ric_B(u,u), sup Hess_B h(u,u)). 1-D bases are allowed
/// here (Ric vanishes identically); only the bound formula needs n >= 2.
pub fn theorem6_constants(
    spec: &WarpedSpec,
    h: &ScalarExpr,
    config: &BoundsConfig,
    tol: &Tolerances,
) -> Result<(SampledExtremum, SampledExtremum)> {
    let terms: Vec<Option<(Vec<f64>, f64, f64)>> = config
        .grid
        .par_iter()
        .map(|p| {
            Ok(direction_terms(&spec.base, h, p, config.direction_floor, tol)?
                .map(|(ric, hess)| (p.clone(), ric, hess)))
        })
        .collect::<Result<_>>()?;
    let skipped = terms.iter().filter(|t| t.is_none()).count();
    let valid: Vec<(Vec<f64>, f64, f64)> = terms.into_iter().flatten().collect();
    if valid.is_empty() {
        return Err(GeomError::NoValidPoints(
            "|grad h| below direction floor everywhere".into(),
        ));
    }
    let a1 = valid
        .iter()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();
    let a2 = valid
        .iter()
        .max_by(|a, b| a.2.partial_cmp(&b.2).unwrap())
        .unwrap();
    Ok((
        SampledExtremum { value: a1.1, location: a1.0.clone(), skipped },
        SampledExtremum { value: a2.2, location: a2.0.clone(), skipped },
    ))
}

/// Two-sided bound (-C{(n+m-1)^2/(n-1) |A1| + |A2|/2} [+ rho], A2 + rho).
pub fn theorem6_bound(
    a1: f64,
    a2: f64,
    c: f64,
    n: usize,
    m: usize,
    rho: f64,
) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(GeomError::Dimension(
            "the (n+m-1)^2/(n-1) factor needs base dimension n >= 2".into(),
        ));
    }
    let nm1 = (n + m - 1) as f64;
    let mut lower = -c * (nm1 * nm1 / (n - 1) as f64 * a1.abs() + a2.abs() / 2.0);
    if rho < 0.0 {
        lower += rho;
    }
    Ok((lower, a2 + rho))
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    pub satisfied: bool,
    /// Quadratic coefficient -(n+m-1)C|A| the second derivative is checked
    /// against.
    pub coefficient: f64,
    /// Fitted linear remainder h(r) - coefficient r^2/2 ~ c1 r + c2.
    pub c1: f64,
    pub c2: f64,
    pub worst_h_second: f64,
}

/// Sufficient condition for quadratic-from-below growth of h along a
/// coordinate ray: h'' >= -(n+m-1)C|A| at every sample.
pub fn potential_growth_check(
    spec: &WarpedSpec,
    h: &ScalarExpr,
    rho: f64,
    config: &BoundsConfig,
    ray: &[Vec<f64>],
    tol: &Tolerances,
) -> Result<GrowthReport> {
    if ray.len() < 2 {
        return Err(GeomError::InvalidInput("ray needs at least two samples".into()));
    }
    let n = spec.base_dim();
    let m = spec.fiber_dim();
    let a = match theorem5_A(spec, h, config, tol) {
        Ok(e) => e.value,
        // 1-D bases and constant potentials degenerate to A = 0
        Err(GeomError::Dimension(_)) | Err(GeomError::NoValidPoints(_)) => 0.0,
        Err(e) => return Err(e),
    };
    let coefficient = -((n + m - 1) as f64) * config.c * a.abs();
    // unit coordinate direction of the ray
    let dir: Vec<f64> = ray
        .last()
        .unwrap()
        .iter()
        .zip(ray[0].iter())
        .map(|(b, a)| b - a)
        .collect();
    let len: f64 = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
    if len == 0.0 {
        return Err(GeomError::InvalidInput("degenerate ray".into()));
    }
    let dir = DVector::from_iterator(dir.len(), dir.iter().map(|d| d / len));
    let mut worst = f64::INFINITY;
    let mut rs = Vec::with_capacity(ray.len());
    let mut residual_y = Vec::with_capacity(ray.len());
    for p in ray {
        let (value, _, hess) = eval_grad_hess_raw(h, p)?;
        let second = (dir.transpose() * &hess * &dir)[(0, 0)];
        worst = worst.min(second);
        let r: f64 = p
            .iter()
            .zip(ray[0].iter())
            .map(|(x, x0)| (x - x0) * (x - x0))
            .sum::<f64>()
            .sqrt();
        rs.push(r);
        residual_y.push(value - coefficient * r * r / 2.0);
    }
    let _ = rho;
    // least-squares line through (r, h - coeff r^2/2)
    let k = rs.len() as f64;
    let sr: f64 = rs.iter().sum();
    let srr: f64 = rs.iter().map(|r| r * r).sum();
    let sy: f64 = residual_y.iter().sum();
    let sry: f64 = rs.iter().zip(&residual_y).map(|(r, y)| r * y).sum();
    let det = k * srr - sr * sr;
    let (c1, c2) = if det.abs() < 1e-14 {
        (0.0, sy / k)
    } else {
        ((k * sry - sr * sy) / det, (srr * sy - sr * sry) / det)
    };
    Ok(GrowthReport {
        satisfied: worst >= coefficient - 1e-9,
        coefficient,
        c1,
        c2,
        worst_h_second: worst,
    })
}

/// Per-point bound ingredients as CSV: point, R, Ric(u,u), Hess h(u,u).
pub fn ingredients_csv(
    spec: &WarpedSpec,
    h: &ScalarExpr,
    config: &BoundsConfig,
    tol: &Tolerances,
) -> Result<String> {
    let total = spec.assemble(tol)?;
    let mut out = String::from("point,scalar,ric_uu,hess_uu\n");
    for p in &config.grid {
        let r = scalar_curvature(&total, &spec.product_point(p), tol)?;
        let coords = p
            .iter()
            .map(|x| format!("{x:.11e}"))
            .collect::<Vec<_>>()
            .join(";");
        match direction_terms(&spec.base, h, p, config.direction_floor, tol)? {
            Some((ric, hess)) => {
                out.push_str(&format!("{coords},{r:.11e},{ric:.11e},{hess:.11e}\n"))
            }
            None => out.push_str(&format!("{coords},{r:.11e},,\n")),
        }
    }
    Ok(out)
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

    /// Flat R^2 base warped over a half-scaled hyperbolic plane; R = -12.
    fn flat_base_hyperbolic_fiber() -> WarpedSpec {
        let base =
            MetricField::euclidean(2, DomainBox::new(vec![(-1.5, 1.5); 2]).unwrap()).unwrap();
        let fiber = MetricField::hyperbolic_half_space(
            2,
            DomainBox::new(vec![(-3.0, 3.0), (0.2, 5.0)]).unwrap(),
        )
        .unwrap()
        .scaled(0.5);
        WarpedSpec::new(base, fiber, (E::coord(0) + E::coord(1)).cosh(), Some(-12.0))
    }

    fn base_grid(spec: &WarpedSpec, n: usize) -> Vec<Vec<f64>> {
        uniform_grid(&spec.base.domain, n, 0.05).unwrap()
    }

    #[test]
    fn flat_base_linear_potential_gives_zero_a() {
        let spec = flat_base_hyperbolic_fiber();
        let config = BoundsConfig::new(1.0, base_grid(&spec, 4)).unwrap();
        let h = E::coord(0) - E::coord(1);
        let a = theorem5_A(&spec, &h, &config, &tol()).unwrap();
        assert_eq!(a.value, 0.0);
        assert_eq!(a.skipped, 0);
    }

    #[test]
    fn one_dimensional_base_rejected() {
        let base = MetricField::diagonal(
            vec![E::constant(1.0)],
            DomainBox::new(vec![(0.1, 6.0)]).unwrap(),
            false,
        )
        .unwrap();
        let spec =
            WarpedSpec::new(base, MetricField::round_sphere(1).unwrap(), E::coord(0), Some(1.0));
        let config = BoundsConfig::new(1.0, base_grid(&spec, 9)).unwrap();
        let h = E::coord(0).powi(2) * -0.5;
        assert!(matches!(
            theorem5_A(&spec, &h, &config, &tol()),
            Err(GeomError::Dimension(_))
        ));
    }

    #[test]
    fn hyperbolic_base_ricci_term() {
        // Ric = -2 g on the half-space chart; with h = x3 the Hessian term
        // is x3/10, so the infimum sits at the largest sampled x3
        let base = MetricField::hyperbolic_half_space(
            3,
            DomainBox::new(vec![(-1.0, 1.0), (-1.0, 1.0), (0.5, 2.0)]).unwrap(),
        )
        .unwrap();
        let fiber = MetricField::hyperbolic_half_space(
            3,
            DomainBox::new(vec![(-1.0, 1.0), (-1.0, 1.0), (0.5, 2.0)]).unwrap(),
        )
        .unwrap();
        let spec = WarpedSpec::new(base, fiber, E::coord(2), Some(0.0));
        let config = BoundsConfig::new(1.0, base_grid(&spec, 3)).unwrap();
        let a = theorem5_A(&spec, &E::coord(2), &config, &tol()).unwrap();
        let x3_max = config.grid.iter().map(|p| p[2]).fold(0.0, f64::max);
        assert_abs_diff_eq!(a.value, -5.0 - x3_max / 10.0, epsilon = 1e-8);
    }

    #[test]
    fn theorem5_bound_arithmetic() {
        assert_eq!(theorem5_bound(0.0, 1.0, 2, 2, 0.0), 0.0);
        assert_eq!(theorem5_bound(0.0, 1.0, 2, 2, -12.0), -12.0);
        assert_eq!(theorem5_bound(-5.0, 1.0, 3, 3, 0.0), -25.0);
        // |A| only, monotone in C
        assert_eq!(theorem5_bound(5.0, 1.0, 3, 3, 0.0), theorem5_bound(-5.0, 1.0, 3, 3, 0.0));
        assert!(theorem5_bound(-5.0, 2.0, 3, 3, 0.0) <= theorem5_bound(-5.0, 1.0, 3, 3, 0.0));
    }

    #[test]
    fn scalar_inf_on_cigar() {
        let domain = DomainBox::new(vec![(0.1, 6.0), (0.0, 2.0 * std::f64::consts::PI)]).unwrap();
        let metric = MetricField::diagonal(
            vec![E::constant(1.0), E::coord(0).tanh().powi(2)],
            domain,
            true,
        )
        .unwrap();
        let grid = uniform_grid(&metric.domain, 12, 0.01).unwrap();
        let (inf, argmin) = empirical_scalar_inf(&metric, &grid, &tol()).unwrap();
        let r_max = grid.iter().map(|p| p[0]).fold(0.0, f64::max);
        assert_eq!(argmin[0], r_max);
        assert_abs_diff_eq!(inf, 4.0 / r_max.cosh().powi(2), epsilon = 1e-8);
        assert!(inf > 0.0 && inf < 1e-3);
    }

    #[test]
    fn report_on_constant_negative_curvature_product() {
        let spec = flat_base_hyperbolic_fiber();
        let config = BoundsConfig::new(1.0, base_grid(&spec, 4)).unwrap();
        let h = E::coord(0) - E::coord(1);
        let report = bound_report(&spec, &h, -12.0, &config, &tol()).unwrap();
        assert_eq!(report.a, Some(0.0));
        assert_abs_diff_eq!(report.bound, -12.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.inf_scalar, -12.0, epsilon = 1e-6);
        assert!(report.satisfied);
        assert_abs_diff_eq!(report.margin, 0.0, epsilon = 1e-6);
        assert_eq!(report.c_star, f64::NEG_INFINITY);
    }

    #[test]
    fn report_degenerates_on_constant_potential() {
        let spec = flat_base_hyperbolic_fiber();
        let config = BoundsConfig::new(1.0, base_grid(&spec, 3)).unwrap();
        let report = bound_report(&spec, &E::constant(2.0), -12.0, &config, &tol()).unwrap();
        assert!(report.degenerate);
        assert_eq!(report.a, None);
        assert_eq!(report.skipped, config.grid.len());
        assert!(report.satisfied);
    }

    #[test]
    fn theorem6_constants_flat_and_euclidean() {
        let spec = flat_base_hyperbolic_fiber();
        let config = BoundsConfig::new(1.0, base_grid(&spec, 4)).unwrap();
        let (a1, a2) =
            theorem6_constants(&spec, &(E::coord(0) - E::coord(1)), &config, &tol()).unwrap();
        assert_eq!(a1.value, 0.0);
        assert_eq!(a2.value, 0.0);

        // punctured Euclidean plane chart, h = r^2/2: Hess h = g
        let base = MetricField::euclidean(
            2,
            DomainBox::new(vec![(0.3, 2.0), (0.3, 2.0)]).unwrap(),
        )
        .unwrap();
        let spec2 = WarpedSpec::new(
            base,
            MetricField::round_sphere(1).unwrap(),
            (E::coord(0).powi(2) + E::coord(1).powi(2)).sqrt(),
            Some(-1.0),
        );
        let h = (E::coord(0).powi(2) + E::coord(1).powi(2)) * 0.5;
        let config2 = BoundsConfig::new(1.0, base_grid(&spec2, 4)).unwrap();
        let (b1, b2) = theorem6_constants(&spec2, &h, &config2, &tol()).unwrap();
        assert_abs_diff_eq!(b1.value, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(b2.value, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn theorem6_constants_cigar_base() {
        // 1-D base with h' = 4 tanh r: A1 = 0, A2 = sup 4/cosh^2 r
        let base = MetricField::diagonal(
            vec![E::constant(1.0)],
            DomainBox::new(vec![(-1.0, 1.0)]).unwrap(),
            false,
        )
        .unwrap();
        let spec =
            WarpedSpec::new(base, MetricField::round_sphere(1).unwrap(), E::coord(0).cosh(), Some(0.0));
        let h = E::coord(0).cosh().ln() * 4.0;
        let config = BoundsConfig::new(1.0, base_grid(&spec, 21)).unwrap();
        let (a1, a2) = theorem6_constants(&spec, &h, &config, &tol()).unwrap();
        assert_eq!(a1.value, 0.0);
        // r = 0 is a critical point of h and gets skipped by the floor
        let r_min = config
            .grid
            .iter()
            .map(|p| p[0].abs())
            .filter(|r| *r > 1e-8)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(a2.skipped, 1);
        assert_abs_diff_eq!(a2.value, 4.0 / r_min.cosh().powi(2), epsilon = 1e-9);
    }

    #[test]
    fn theorem6_bound_arithmetic() {
        assert_eq!(theorem6_bound(0.0, 0.0, 1.0, 2, 2, 0.0).unwrap(), (0.0, 0.0));
        assert_eq!(theorem6_bound(0.0, 1.0, 2.0, 2, 2, -1.0).unwrap(), (-2.0, 0.0));
        let (lo, hi) = theorem6_bound(0.0, 4.0, 1.0, 2, 1, 0.0).unwrap();
        assert_eq!((lo, hi), (-2.0, 4.0));
        assert!(matches!(
            theorem6_bound(0.0, 1.0, 1.0, 1, 2, 0.0),
            Err(GeomError::Dimension(_))
        ));
    }

    #[test]
    fn growth_check_on_quadratic_potential() {
        let base = MetricField::euclidean(
            2,
            DomainBox::new(vec![(0.3, 2.0), (0.3, 2.0)]).unwrap(),
        )
        .unwrap();
        let spec = WarpedSpec::new(
            base,
            MetricField::round_sphere(1).unwrap(),
            (E::coord(0).powi(2) + E::coord(1).powi(2)).sqrt(),
            Some(-1.0),
        );
        let h = (E::coord(0).powi(2) + E::coord(1).powi(2)) * 0.5;
        let config = BoundsConfig::new(1.0, base_grid(&spec, 4)).unwrap();
        let ray: Vec<Vec<f64>> = (0..20).map(|i| vec![0.4 + 0.08 * i as f64, 0.4]).collect();
        let report = potential_growth_check(&spec, &h, -1.0, &config, &ray, &tol()).unwrap();
        assert!(report.satisfied);
        assert_abs_diff_eq!(report.worst_h_second, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn growth_check_constant_potential() {
        let spec = flat_base_hyperbolic_fiber();
        let config = BoundsConfig::new(1.0, base_grid(&spec, 3)).unwrap();
        let ray: Vec<Vec<f64>> = (0..10).map(|i| vec![-1.0 + 0.2 * i as f64, 0.0]).collect();
        let report =
            potential_growth_check(&spec, &E::constant(3.0), -12.0, &config, &ray, &tol()).unwrap();
        assert!(report.satisfied);
        assert_abs_diff_eq!(report.c1, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(report.c2, 3.0, epsilon = 1e-9);
    }

    #[test]
    fn growth_check_one_dimensional_base_sentinel() {
        // cigar chart: 1-D base routes through the A = 0 sentinel
        let base = MetricField::diagonal(
            vec![E::constant(1.0)],
            DomainBox::new(vec![(0.1, 4.0)]).unwrap(),
            false,
        )
        .unwrap();
        let spec =
            WarpedSpec::new(base, MetricField::round_sphere(1).unwrap(), E::coord(0).tanh() * 4.0, Some(0.0));
        let h = E::coord(0).cosh().ln() * 4.0;
        let config = BoundsConfig::new(1.0, base_grid(&spec, 9)).unwrap();
        let ray: Vec<Vec<f64>> = (0..15).map(|i| vec![0.2 + 0.25 * i as f64]).collect();
        let report = potential_growth_check(&spec, &h, 0.0, &config, &ray, &tol()).unwrap();
        assert!(report.satisfied);
        assert_eq!(report.coefficient, 0.0);
    }

    #[test]
    fn ingredients_csv_shape() {
        let spec = flat_base_hyperbolic_fiber();
        let config = BoundsConfig::new(1.0, base_grid(&spec, 2)).unwrap();
        let csv = ingredients_csv(&spec, &(E::coord(0) - E::coord(1)), &config, &tol()).unwrap();
        assert_eq!(csv.lines().count(), 1 + config.grid.len());
        assert!(csv.starts_with("point,scalar,ric_uu,hess_uu"));
    }
}
