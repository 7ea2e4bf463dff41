//! The manifold-spec JSON file format consumed by the CLI.
//!
//! A spec file carries either a plain expression-matrix metric or a warped
//! product, an optional potential and soliton constant, and declared flags.
//! Unknown keys are rejected so typos fail loudly.

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::expr::ScalarExpr;
use crate::metric::{DomainBox, MetricField};
use crate::soliton::{Geometry, SolitonClass, SolitonInstance};
use crate::warped::WarpedSpec;

/// Declared (not verified) structural properties.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpecFlags {
    pub complete_total: bool,
    pub complete_base: bool,
    pub trivial: bool,
    pub soliton_class: Option<SolitonClass>,
}

/// One chart: dimension, coordinate names, full metric matrix, open box
/// domain.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricBlock {
    pub dim: usize,
    pub coordinates: Vec<String>,
    pub metric: Vec<Vec<ScalarExpr>>,
    pub domain: Vec<(f64, f64)>,
    #[serde(default)]
    pub complete: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WarpedBlock {
    pub base: MetricBlock,
    pub fiber: MetricBlock,
    pub warping: ScalarExpr,
    #[serde(default)]
    pub trivial_product: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldSpecFile {
    pub dim: usize,
    pub coordinates: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metric: Option<Vec<Vec<ScalarExpr>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warped: Option<WarpedBlock>,
    pub domain: Vec<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub potential: Option<ScalarExpr>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flags: Option<SpecFlags>,
}

fn default_coordinates(dim: usize) -> Vec<String> {
    (1..=dim).map(|i| format!("x{i}")).collect()
}

fn matrix_of(metric: &MetricField) -> Vec<Vec<ScalarExpr>> {
    let d = metric.dim();
    (0..d)
        .map(|i| (0..d).map(|j| metric.entry(i, j).clone()).collect())
        .collect()
}

fn block_of(metric: &MetricField) -> MetricBlock {
    MetricBlock {
        dim: metric.dim(),
        coordinates: default_coordinates(metric.dim()),
        metric: matrix_of(metric),
        domain: metric.domain.intervals.clone(),
        complete: metric.complete,
    }
}

fn metric_of(block: &MetricBlock) -> Result<MetricField> {
    if block.coordinates.len() != block.dim {
        return Err(GeomError::Parse(format!(
            "{} coordinate names for dimension {}",
            block.coordinates.len(),
            block.dim
        )));
    }
    if block.metric.len() != block.dim || block.metric.iter().any(|r| r.len() != block.dim) {
        return Err(GeomError::Parse("metric matrix shape mismatch".into()));
    }
    let entries: Vec<ScalarExpr> = block.metric.iter().flatten().cloned().collect();
    MetricField::from_matrix(
        block.dim,
        entries,
        DomainBox::new(block.domain.clone())?,
        block.complete,
    )
}

impl ManifoldSpecFile {
    pub fn from_json(text: &str) -> Result<ManifoldSpecFile> {
        let file: ManifoldSpecFile =
            serde_json::from_str(text).map_err(|e| GeomError::Parse(e.to_string()))?;
        file.validate()?;
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec file serializes")
    }

    fn validate(&self) -> Result<()> {
        match (&self.metric, &self.warped) {
            (Some(_), Some(_)) => {
                Err(GeomError::Parse("both 'metric' and 'warped' present".into()))
            }
            (None, None) => Err(GeomError::Parse("neither 'metric' nor 'warped' present".into())),
            (Some(m), None) => {
                if m.len() != self.dim || m.iter().any(|r| r.len() != self.dim) {
                    return Err(GeomError::Parse("metric matrix shape mismatch".into()));
                }
                if self.domain.len() != self.dim || self.coordinates.len() != self.dim {
                    return Err(GeomError::Parse("domain/coordinate dimension mismatch".into()));
                }
                Ok(())
            }
            (None, Some(w)) => {
                if w.base.dim + w.fiber.dim != self.dim {
                    return Err(GeomError::Parse(format!(
                        "base dim {} + fiber dim {} != total dim {}",
                        w.base.dim, w.fiber.dim, self.dim
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn geometry(&self) -> Result<Geometry> {
        if let Some(matrix) = &self.metric {
            let entries: Vec<ScalarExpr> = matrix.iter().flatten().cloned().collect();
            let complete = self.flags.as_ref().map(|f| f.complete_total).unwrap_or(false);
            return Ok(Geometry::Metric(MetricField::from_matrix(
                self.dim,
                entries,
                DomainBox::new(self.domain.clone())?,
                complete,
            )?));
        }
        let w = self.warped.as_ref().expect("validated");
        let mut spec = WarpedSpec::new(
            metric_of(&w.base)?,
            metric_of(&w.fiber)?,
            w.warping.clone(),
            self.rho,
        );
        spec.trivial_product = w.trivial_product;
        Ok(Geometry::Warped(spec))
    }

    /// The soliton instance, when a potential and rho are both present.
    pub fn soliton(&self) -> Result<Option<SolitonInstance>> {
        match (&self.potential, self.rho) {
            (Some(h), Some(rho)) => {
                Ok(Some(SolitonInstance::new(self.geometry()?, h.clone(), rho)))
            }
            _ => Ok(None),
        }
    }

    pub fn from_metric(
        metric: &MetricField,
        potential: Option<ScalarExpr>,
        rho: Option<f64>,
        flags: Option<SpecFlags>,
    ) -> ManifoldSpecFile {
        ManifoldSpecFile {
            dim: metric.dim(),
            coordinates: default_coordinates(metric.dim()),
            metric: Some(matrix_of(metric)),
            warped: None,
            domain: metric.domain.intervals.clone(),
            potential,
            rho,
            flags,
        }
    }

    pub fn from_warped(
        spec: &WarpedSpec,
        potential: Option<ScalarExpr>,
        rho: Option<f64>,
        flags: Option<SpecFlags>,
    ) -> ManifoldSpecFile {
        let dim = spec.base_dim() + spec.fiber_dim();
        let mut domain = spec.base.domain.intervals.clone();
        domain.extend(spec.fiber.domain.intervals.iter().cloned());
        ManifoldSpecFile {
            dim,
            coordinates: default_coordinates(dim),
            metric: None,
            warped: Some(WarpedBlock {
                base: block_of(&spec.base),
                fiber: block_of(&spec.fiber),
                warping: spec.warping.clone(),
                trivial_product: spec.trivial_product,
            }),
            domain,
            potential,
            rho,
            flags,
        }
    }
}
