use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{geodesic_distance, BoundaryPatch, MetricGrid, PatchSpec, ScalarField};
use crate::scalar::{to_f64, Real};

/// Boundary-distance coordinates `(τ̃^T[σ_1](x), …, τ̃^T[σ_m](x))` of every
/// node in the layer `Ω^T`.
#[derive(Clone, Debug)]
pub struct EmbeddingImage {
    pub points: Vec<Vec<f64>>,
    pub nodes: Vec<usize>,
    /// Depth `τ[Γ]` of each included node.
    pub depth: Vec<f64>,
}

/// Distance fields of every patch, reused by the audits.
pub fn distance_fields<T: Real>(grid: &MetricGrid<T>, patches: &[PatchSpec]) -> Result<Vec<ScalarField<T>>> {
    patches
        .par_iter()
        .map(|p| geodesic_distance(grid, &BoundaryPatch::new(grid, p)?))
        .collect()
}

/// Depth of every node, `τ[Γ]`.
pub fn depth<T: Real>(grid: &MetricGrid<T>) -> Result<ScalarField<T>> {
    geodesic_distance(grid, &BoundaryPatch::new(grid, &PatchSpec::whole_boundary())?)
}

/// Checks `Ω^T ≠ Ω`: some node must lie at depth `T + h` or more.
pub fn check_horizon<T: Real>(grid: &MetricGrid<T>, horizon: f64) -> Result<ScalarField<T>> {
    let d = depth(grid)?;
    let max = to_f64(d.max_abs());
    let h = to_f64(grid.max_spacing());
    if max < horizon + h {
        return Err(Error::Config(format!(
            "T = {horizon} reaches the whole domain: deepest node is at {max:.4}, need at least T + h = {:.4}",
            horizon + h
        )));
    }
    Ok(d)
}

pub fn ground_truth_embedding<T: Real>(grid: &MetricGrid<T>, patches: &[PatchSpec], horizon: f64) -> Result<EmbeddingImage> {
    let d = check_horizon(grid, horizon)?;
    let fields = distance_fields(grid, patches)?;
    Ok(embed(&d, &fields, horizon))
}

pub fn embed<T: Real>(depth: &ScalarField<T>, fields: &[ScalarField<T>], horizon: f64) -> EmbeddingImage {
    let mut out = EmbeddingImage { points: Vec::new(), nodes: Vec::new(), depth: Vec::new() };
    for (n, &dv) in depth.values.iter().enumerate() {
        let dv = to_f64(dv);
        if dv < horizon {
            out.points.push(fields.iter().map(|f| (horizon - to_f64(f.values[n])).max(0.0)).collect());
            out.nodes.push(n);
            out.depth.push(dv);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub hausdorff: f64,
    /// `max_{a∈A} min_{b∈B} |a − b|_∞`
    pub a_to_b: f64,
    pub b_to_a: f64,
    /// Quantiles (50, 90, 99, 100%) of nearest-neighbour distances from A to B.
    pub a_quantiles: [f64; 4],
    pub b_quantiles: [f64; 4],
    pub config_hash: String,
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn nearest(from: &[Vec<f64>], to: &[Vec<f64>]) -> Vec<f64> {
    from.par_iter()
        .map(|a| to.iter().fold(f64::INFINITY, |m, b| m.min(linf(a, b))))
        .collect()
}

fn quantiles(mut v: Vec<f64>) -> [f64; 4] {
    if v.is_empty() {
        return [0.0; 4];
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let q = |p: f64| v[((v.len() - 1) as f64 * p).round() as usize];
    [q(0.5), q(0.9), q(0.99), q(1.0)]
}

/// Exact symmetric Hausdorff distance in the max norm.
pub fn hausdorff(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<ComparisonReport> {
    let dim = |c: &[Vec<f64>]| c.first().map(|p| p.len());
    if let (Some(x), Some(y)) = (dim(a), dim(b)) {
        if x != y || a.iter().chain(b).any(|p| p.len() != x) {
            return Err(Error::Dimension(format!("tuple dimensions {x} and {y} differ")));
        }
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::Dimension("empty point cloud".into()));
    }
    let da = nearest(a, b);
    let db = nearest(b, a);
    let a_to_b = da.iter().cloned().fold(0.0, f64::max);
    let b_to_a = db.iter().cloned().fold(0.0, f64::max);
    Ok(ComparisonReport {
        hausdorff: a_to_b.max(b_to_a),
        a_to_b,
        b_to_a,
        a_quantiles: quantiles(da),
        b_quantiles: quantiles(db),
        config_hash: String::new(),
    })
}
