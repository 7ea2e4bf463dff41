//! Deterministic sample grids over open domain boxes.

use crate::error::{GeomError, Result};
use crate::metric::DomainBox;

/// Shrink an open interval by the boundary margin. The margin is relative to
/// the axis width with an absolute floor, so grids stay off coordinate
/// singularities at chart edges.
fn shrunk(lo: f64, hi: f64, margin: f64) -> Result<(f64, f64)> {
    if !lo.is_finite() || !hi.is_finite() {
        return Err(GeomError::InvalidInput(
            "cannot grid an unbounded domain axis; supply a finite sampling window".into(),
        ));
    }
    let m = (margin * (hi - lo)).max(margin);
    let (a, b) = (lo + m, hi - m);
    if !(a < b) {
        return Err(GeomError::InvalidInput("domain axis too narrow for boundary margin".into()));
    }
    Ok((a, b))
}

/// Uniform grid with `n` points per axis, shrunk by the boundary margin.
pub fn uniform_grid(domain: &DomainBox, n: usize, margin: f64) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(GeomError::InvalidInput("grid size must be positive".into()));
    }
    let axes: Vec<Vec<f64>> = domain
        .intervals
        .iter()
        .map(|&(lo, hi)| {
            let (a, b) = shrunk(lo, hi, margin)?;
            Ok((0..n)
                .map(|i| {
                    if n == 1 {
                        0.5 * (a + b)
                    } else {
                        a + (b - a) * i as f64 / (n - 1) as f64
                    }
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut points = vec![vec![]];
    for axis in &axes {
        let mut next = Vec::with_capacity(points.len() * axis.len());
        for p in &points {
            for &x in axis {
                let mut q = p.clone();
                q.push(x);
                next.push(q);
            }
        }
        points = next;
    }
    Ok(points)
}

/// splitmix64; enough randomness for grid jitter without an RNG dependency.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn unit_f64(state: &mut u64) -> f64 {
    (splitmix64(state) >> 11) as f64 / (1u64 << 53) as f64
}

/// Uniform grid with deterministic per-point jitter of up to half a cell.
pub fn jittered_grid(domain: &DomainBox, n: usize, margin: f64, seed: u64) -> Result<Vec<Vec<f64>>> {
    let mut points = uniform_grid(domain, n, margin)?;
    let mut state = seed;
    let widths: Vec<f64> = domain
        .intervals
        .iter()
        .map(|&(lo, hi)| {
            let (a, b) = shrunk(lo, hi, margin).expect("validated by uniform_grid");
            if n > 1 { (b - a) / (n - 1) as f64 } else { 0.0 }
        })
        .collect();
    for p in &mut points {
        for (x, &w) in p.iter_mut().zip(&widths) {
            *x += (unit_f64(&mut state) - 0.5) * 0.5 * w;
        }
    }
    Ok(points)
}

/// Random interior points, deterministic in the seed.
pub fn random_points(domain: &DomainBox, count: usize, margin: f64, seed: u64) -> Result<Vec<Vec<f64>>> {
    let spans: Vec<(f64, f64)> = domain
        .intervals
        .iter()
        .map(|&(lo, hi)| shrunk(lo, hi, margin))
        .collect::<Result<_>>()?;
    let mut state = seed;
    Ok((0..count)
        .map(|_| {
            spans
                .iter()
                .map(|&(a, b)| a + (b - a) * unit_f64(&mut state))
                .collect()
        })
        .collect())
}
