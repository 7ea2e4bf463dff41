//! Symmetric metric fields over an open box chart domain.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::expr::ScalarExpr;
use crate::jet::{eval_grad_hess_raw, eval_value};

/// Axis-aligned open box, possibly unbounded per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub intervals: Vec<(f64, f64)>,
}

impl DomainBox {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.iter().any(|&(lo, hi)| !(lo < hi)) {
            return Err(GeomError::InvalidInput("domain box has an empty axis interval".into()));
        }
        Ok(DomainBox { intervals })
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim()
            && point
                .iter()
                .zip(&self.intervals)
                .all(|(&x, &(lo, hi))| x > lo && x < hi)
    }

    /// Cartesian product of two boxes (base coords first).
    pub fn product(&self, other: &DomainBox) -> DomainBox {
        let mut intervals = self.intervals.clone();
        intervals.extend(other.intervals.iter().cloned());
        DomainBox { intervals }
    }

    /// Chart-center point, for axes where that makes sense. Unbounded axes
    /// fall back to 1.0 away from the finite end (or 0.0 when fully open).
    pub fn center(&self) -> Vec<f64> {
        self.intervals
            .iter()
            .map(|&(lo, hi)| match (lo.is_finite(), hi.is_finite()) {
                (true, true) => 0.5 * (lo + hi),
                (true, false) => lo + 1.0,
                (false, true) => hi - 1.0,
                (false, false) => 0.0,
            })
            .collect()
    }
}

/// d x d symmetric matrix of closed-form entries with a declared domain.
/// Only the upper triangle is stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricField {
    dim: usize,
    /// Row-major upper triangle: entry (i, j) with i <= j at index
    /// i*dim - i*(i-1)/2 + (j - i).
    components: Vec<ScalarExpr>,
    pub domain: DomainBox,
    /// Declared completeness of the underlying metric; recorded, never
    /// verified numerically.
    pub complete: bool,
}

/// First and second coordinate derivatives of every metric entry at a point,
/// together with the inverse. All entries are jet-exact.
#[derive(Debug, Clone)]
pub struct MetricJets {
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    /// dg[c][(i,j)] = d_c g_ij
    pub dg: Vec<DMatrix<f64>>,
    /// ddg[c][d][(i,j)] = d_c d_d g_ij
    pub ddg: Vec<Vec<DMatrix<f64>>>,
}

fn tri_index(dim: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * dim - i * (i + 1) / 2 + j
}

/// Cholesky factorization with a relative pivot floor. Returns the lower
/// factor, or an SPD error carrying the worst pivot ratio.
fn checked_cholesky(g: &DMatrix<f64>, point: &[f64], pivot_ratio: f64) -> Result<DMatrix<f64>> {
    let d = g.nrows();
    let mut l = DMatrix::<f64>::zeros(d, d);
    let mut min_pivot = f64::INFINITY;
    let mut max_pivot: f64 = 0.0;
    for j in 0..d {
        let mut pivot = g[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        min_pivot = min_pivot.min(pivot);
        max_pivot = max_pivot.max(pivot.abs());
        if pivot <= 0.0 || (max_pivot > 0.0 && pivot <= pivot_ratio * max_pivot) {
            return Err(GeomError::Spd {
                point: point.to_vec(),
                pivot_ratio: if max_pivot > 0.0 { pivot / max_pivot } else { 0.0 },
            });
        }
        l[(j, j)] = pivot.sqrt();
        for i in (j + 1)..d {
            let mut s = g[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / l[(j, j)];
        }
    }
    Ok(l)
}

fn cholesky_inverse(l: &DMatrix<f64>) -> DMatrix<f64> {
    let d = l.nrows();
    // invert L by forward substitution, then G^-1 = L^-T L^-1
    let mut linv = DMatrix::<f64>::zeros(d, d);
    for j in 0..d {
        linv[(j, j)] = 1.0 / l[(j, j)];
        for i in (j + 1)..d {
            let mut s = 0.0;
            for k in j..i {
                s -= l[(i, k)] * linv[(k, j)];
            }
            linv[(i, j)] = s / l[(i, i)];
        }
    }
    linv.transpose() * linv
}

impl MetricField {
    /// Build from a full symmetric matrix of entries (row-major, dim*dim).
    pub fn from_matrix(
        dim: usize,
        entries: Vec<ScalarExpr>,
        domain: DomainBox,
        complete: bool,
    ) -> Result<Self> {
        if domain.dim() != dim {
            return Err(GeomError::InvalidInput("domain dimension mismatch".into()));
        }
        if entries.len() != dim * dim {
            return Err(GeomError::InvalidInput(format!(
                "expected {} metric entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        let mut components = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in i..dim {
                if entries[i * dim + j] != entries[j * dim + i] {
                    return Err(GeomError::InvalidInput(format!(
                        "metric entries ({i},{j}) and ({j},{i}) differ"
                    )));
                }
                components.push(entries[i * dim + j].clone());
            }
        }
        Ok(MetricField { dim, components, domain, complete })
    }

    pub fn diagonal(entries: Vec<ScalarExpr>, domain: DomainBox, complete: bool) -> Result<Self> {
        let dim = entries.len();
        let mut full = vec![ScalarExpr::constant(0.0); dim * dim];
        for (i, e) in entries.into_iter().enumerate() {
            full[i * dim + i] = e;
        }
        MetricField::from_matrix(dim, full, domain, complete)
    }

    pub fn euclidean(dim: usize, domain: DomainBox) -> Result<Self> {
        MetricField::diagonal(vec![ScalarExpr::constant(1.0); dim], domain, true)
    }

    /// Round sphere S^k of radius 1 in polar coordinates:
    /// diag(1, sin^2 phi_1, sin^2 phi_1 sin^2 phi_2, ...). For k = 1 this is
    /// the circle chart d theta^2 on (0, 2 pi).
    pub fn round_sphere(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(GeomError::Dimension("sphere dimension must be >= 1".into()));
        }
        if k == 1 {
            return MetricField::diagonal(
                vec![ScalarExpr::constant(1.0)],
                DomainBox::new(vec![(0.0, 2.0 * std::f64::consts::PI)])?,
                false,
            );
        }
        let mut entries = vec![ScalarExpr::constant(1.0)];
        let mut intervals = vec![(0.0, std::f64::consts::PI)];
        for i in 1..k {
            let mut e = ScalarExpr::constant(1.0);
            for j in 0..i {
                e = e * ScalarExpr::coord(j).sin().powi(2);
            }
            entries.push(e);
            intervals.push(if i == k - 1 {
                (0.0, 2.0 * std::f64::consts::PI)
            } else {
                (0.0, std::f64::consts::PI)
            });
        }
        MetricField::diagonal(entries, DomainBox::new(intervals)?, false)
    }

    /// Hyperbolic upper half-space chart of curvature -1:
    /// (1/x_d^2) * (dx_1^2 + ... + dx_d^2) on {x_d > 0}, sampled on a finite
    /// sub-box.
    pub fn hyperbolic_half_space(dim: usize, domain: DomainBox) -> Result<Self> {
        let conformal = ScalarExpr::constant(1.0) / ScalarExpr::coord(dim - 1).powi(2);
        MetricField::diagonal(vec![conformal; dim], domain, true)
    }

    /// Multiply every entry by a constant factor (metric rescaling g -> c g).
    pub fn scaled(&self, factor: f64) -> MetricField {
        let mut out = self.clone();
        out.components = out
            .components
            .into_iter()
            .map(|e| e * ScalarExpr::constant(factor))
            .collect();
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> &ScalarExpr {
        &self.components[tri_index(self.dim, i, j)]
    }

    /// Metric values at a point, SPD-checked.
    pub fn values_at(&self, point: &[f64], pivot_ratio: f64) -> Result<DMatrix<f64>> {
        if !self.domain.contains(point) {
            return Err(GeomError::Domain(format!(
                "point {point:?} outside chart domain {:?}",
                self.domain.intervals
            )));
        }
        let d = self.dim;
        let mut g = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                let v = eval_value(self.entry(i, j), point)?;
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        checked_cholesky(&g, point, pivot_ratio)?;
        Ok(g)
    }

    /// Values plus first and second derivatives of every entry, jet-exact,
    /// with the inverse metric. SPD-checked.
    pub fn jets_at(&self, point: &[f64], pivot_ratio: f64) -> Result<MetricJets> {
        if !self.domain.contains(point) {
            return Err(GeomError::Domain(format!(
                "point {point:?} outside chart domain {:?}",
                self.domain.intervals
            )));
        }
        let d = self.dim;
        let mut g = DMatrix::zeros(d, d);
        let mut dg = vec![DMatrix::zeros(d, d); d];
        let mut ddg = vec![vec![DMatrix::zeros(d, d); d]; d];
        for i in 0..d {
            for j in i..d {
                let (v, grad, hess) = eval_grad_hess_raw(self.entry(i, j), point)?;
                g[(i, j)] = v;
                g[(j, i)] = v;
                for c in 0..d {
                    dg[c][(i, j)] = grad[c];
                    dg[c][(j, i)] = grad[c];
                    for e in 0..d {
                        ddg[c][e][(i, j)] = hess[(c, e)];
                        ddg[c][e][(j, i)] = hess[(c, e)];
                    }
                }
            }
        }
        let l = checked_cholesky(&g, point, pivot_ratio)?;
        let g_inv = cholesky_inverse(&l);
        Ok(MetricJets { g, g_inv, dg, ddg })
    }
}
