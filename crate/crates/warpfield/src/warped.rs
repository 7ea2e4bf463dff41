//! Warped products g = g_B + f^2 g_F: chart assembly, the lambda field of
//! the base almost-soliton, the compatibility chain
//! g_B(grad f, grad h)/f = R_B - lambda = R - rho, and fiber
//! scalar-curvature constancy.

use serde::{Deserialize, Serialize};

use crate::curvature::{gradient_and_laplacian, scalar_curvature};
use crate::error::{GeomError, Result};
use crate::expr::ScalarExpr;
use crate::grid::uniform_grid;
use crate::jet::eval_value;
use crate::metric::MetricField;
use crate::tol::Tolerances;

/// Product structure B^n x_f F^m with warping function f on the base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarpedSpec {
    pub base: MetricField,
    pub fiber: MetricField,
    /// Warping function over base coordinates; strictly positive.
    pub warping: ScalarExpr,
    /// Soliton constant, when the spec is paired with a potential.
    pub rho: Option<f64>,
    /// Set for deliberate direct products (constant f).
    #[serde(default)]
    pub trivial_product: bool,
}

/// The three members of the compatibility chain at a base point, plus the
/// max pairwise deviation (the test statistic).
#[derive(Debug, Clone, Serialize)]
pub struct ChainSample {
    /// g_B(grad f, grad h) / f
    pub warp_term: f64,
    /// R_B - lambda
    pub base_term: f64,
    /// R - rho on the assembled product
    pub total_term: f64,
    pub deviation: f64,
}

fn points_per_axis(dim: usize) -> usize {
    match dim {
        1 => 9,
        2 => 5,
        _ => 3,
    }
}

impl WarpedSpec {
    pub fn new(base: MetricField, fiber: MetricField, warping: ScalarExpr, rho: Option<f64>) -> Self {
        WarpedSpec { base, fiber, warping, rho, trivial_product: false }
    }

    pub fn base_dim(&self) -> usize {
        self.base.dim()
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber.dim()
    }

    /// Sample f over a default base grid: must be strictly positive, and
    /// nonconstant unless the trivial-product flag is set.
    pub fn validate_warping(&self, tol: &Tolerances) -> Result<()> {
        let grid = uniform_grid(&self.base.domain, points_per_axis(self.base_dim()), tol.boundary_margin)?;
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for p in &grid {
            let v = eval_value(&self.warping, p)?;
            if v <= 0.0 {
                return Err(GeomError::Positivity(format!(
                    "warping function is {v} at base point {p:?}"
                )));
            }
            min = min.min(v);
            max = max.max(v);
        }
        if !self.trivial_product && max - min <= 1e-10 {
            return Err(GeomError::Positivity(
                "warping function is constant but the spec is not flagged as a trivial product"
                    .into(),
            ));
        }
        Ok(())
    }

    /// Block product metric: base block g_B, fiber block f(base)^2 g_F,
    /// zero off-diagonal. Domain is the product box.
    pub fn assemble(&self, tol: &Tolerances) -> Result<MetricField> {
        self.validate_warping(tol)?;
        let n = self.base_dim();
        let m = self.fiber_dim();
        let d = n + m;
        let f_sq = self.warping.clone().powi(2);
        let mut entries = vec![ScalarExpr::constant(0.0); d * d];
        for i in 0..n {
            for j in 0..n {
                entries[i * d + j] = self.base.entry(i, j).clone();
            }
        }
        for i in 0..m {
            for j in 0..m {
                let fiber_entry = self.fiber.entry(i, j).shift_coords(n);
                entries[(n + i) * d + (n + j)] = f_sq.clone() * fiber_entry;
            }
        }
        let domain = self.base.domain.product(&self.fiber.domain);
        MetricField::from_matrix(d, entries, domain, self.base.complete && self.fiber.complete)
    }

    /// Lift a base point to the product chart using the fiber chart center.
    pub fn product_point(&self, point_b: &[f64]) -> Vec<f64> {
        let mut p = point_b.to_vec();
        p.extend(self.fiber.domain.center());
        p
    }
}

/// Fiber scalar curvature sampled over a grid: (mean, max deviation).
pub fn fiber_constancy(
    spec: &WarpedSpec,
    fiber_grid: &[Vec<f64>],
    tol: &Tolerances,
) -> Result<(f64, f64)> {
    if fiber_grid.is_empty() {
        return Err(GeomError::InvalidInput("empty fiber grid".into()));
    }
    let values: Vec<f64> = fiber_grid
        .iter()
        .map(|p| scalar_curvature(&spec.fiber, p, tol))
        .collect::<Result<_>>()?;
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let deviation = values.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    Ok((mean, deviation))
}

/// Constant fiber scalar curvature over the default fiber grid, or a
/// constancy error when it varies beyond tolerance.
pub fn fiber_scalar(spec: &WarpedSpec, tol: &Tolerances) -> Result<f64> {
    // Wider margin than the generic 1e-3 strip: constancy certification only
    // needs interior samples, and chart-singular edges (sphere poles) cost
    // several digits of cancellation in the curvature contraction.
    let grid = uniform_grid(&spec.fiber.domain, points_per_axis(spec.fiber_dim()), 0.05)?;
    let (mean, deviation) = fiber_constancy(spec, &grid, tol)?;
    let allowed = tol.fiber_constancy * mean.abs().max(1.0);
    if deviation > allowed {
        return Err(GeomError::Constancy { deviation, tolerance: allowed });
    }
    Ok(mean)
}

/// The almost-soliton lambda field on the base:
/// lambda = -R_F/f^2 + 2m Delta_B f / f + m(m-1) |grad_B f|^2 / f^2 + rho.
pub fn lambda_field(spec: &WarpedSpec, point_b: &[f64], tol: &Tolerances) -> Result<f64> {
    let rho = spec
        .rho
        .ok_or_else(|| GeomError::InvalidInput("lambda field needs rho on the spec".into()))?;
    let r_f = fiber_scalar(spec, tol)?;
    let m = spec.fiber_dim() as f64;
    let f = eval_value(&spec.warping, point_b)?;
    if f <= 0.0 {
        return Err(GeomError::Positivity(format!("warping function is {f} at {point_b:?}")));
    }
    let (_, grad_sq, lap) = gradient_and_laplacian(&spec.base, &spec.warping, point_b, tol)?;
    Ok(-r_f / (f * f) + 2.0 * m * lap / f + m * (m - 1.0) * grad_sq / (f * f) + rho)
}

/// Direct scalar curvature of the assembled product via the warped-product
/// formula obtained by eliminating lambda between the lambda field and the
/// compatibility chain:
/// R = R_B + R_F/f^2 - 2m Delta_B f/f - m(m-1)|grad_B f|^2/f^2.
pub fn warped_scalar_oracle(spec: &WarpedSpec, point_b: &[f64], tol: &Tolerances) -> Result<f64> {
    let r_f = fiber_scalar(spec, tol)?;
    let m = spec.fiber_dim() as f64;
    let f = eval_value(&spec.warping, point_b)?;
    let r_b = scalar_curvature(&spec.base, point_b, tol)?;
    let (_, grad_sq, lap) = gradient_and_laplacian(&spec.base, &spec.warping, point_b, tol)?;
    Ok(r_b + r_f / (f * f) - 2.0 * m * lap / f - m * (m - 1.0) * grad_sq / (f * f))
}

/// Evaluate the compatibility chain at a base point. The potential `h` is a
/// function of the base coordinates; R is computed on the assembled product
/// at the lifted point.
pub fn fe14_check(
    spec: &WarpedSpec,
    h: &ScalarExpr,
    point_b: &[f64],
    tol: &Tolerances,
) -> Result<ChainSample> {
    let rho = spec
        .rho
        .ok_or_else(|| GeomError::InvalidInput("compatibility chain needs rho on the spec".into()))?;
    let lambda = lambda_field(spec, point_b, tol)?;
    let f = eval_value(&spec.warping, point_b)?;

    let mj = spec.base.jets_at(point_b, tol.spd_pivot_ratio)?;
    let (grad_f, _, _) = gradient_and_laplacian(&spec.base, &spec.warping, point_b, tol)?;
    let (grad_h, _, _) = gradient_and_laplacian(&spec.base, h, point_b, tol)?;
    // g_B(grad f, grad h) with both gradients raised
    let inner = (mj.g.clone() * &grad_f).dot(&grad_h);
    let warp_term = inner / f;

    let r_b = scalar_curvature(&spec.base, point_b, tol)?;
    let base_term = r_b - lambda;

    let total = spec.assemble(tol)?;
    let r_total = scalar_curvature(&total, &spec.product_point(point_b), tol)?;
    let total_term = r_total - rho;

    let deviation = (warp_term - base_term)
        .abs()
        .max((warp_term - total_term).abs())
        .max((base_term - total_term).abs());
    Ok(ChainSample { warp_term, base_term, total_term, deviation })
}

/// Max over product points of |(R - rho) - g(grad h, grad f)/f| on the
/// assembled metric. The product-level form of the chain; needs no lambda.
pub fn sce_identity_check(
    spec: &WarpedSpec,
    h: &ScalarExpr,
    points: &[Vec<f64>],
    tol: &Tolerances,
) -> Result<f64> {
    let rho = spec
        .rho
        .ok_or_else(|| GeomError::InvalidInput("identity check needs rho on the spec".into()))?;
    let total = spec.assemble(tol)?;
    let mut worst: f64 = 0.0;
    for p in points {
        let r = scalar_curvature(&total, p, tol)?;
        let f = eval_value(&spec.warping, p)?;
        let mj = total.jets_at(p, tol.spd_pivot_ratio)?;
        let (grad_h, _, _) = gradient_and_laplacian(&total, h, p, tol)?;
        let (grad_f, _, _) = gradient_and_laplacian(&total, &spec.warping, p, tol)?;
        let inner = (mj.g.clone() * &grad_h).dot(&grad_f);
        worst = worst.max(((r - rho) - inner / f).abs());
    }
    Ok(worst)
}
