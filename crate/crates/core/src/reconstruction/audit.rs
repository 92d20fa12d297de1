use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::embedding::{check_horizon, distance_fields};
use crate::error::Result;
use crate::manifold::{distance_from_nodes, MetricGrid, PatchSpec};
use crate::scalar::{to_f64, Real};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub pairs: usize,
    pub separated: usize,
    pub fraction: f64,
    /// Smallest best-coordinate gap over all pairs.
    pub worst_gap: f64,
    /// Layer nodes left out because they lie within `2h` of the cut `τ[Γ] = T`.
    pub excluded_near_cut: usize,
}

/// For random node pairs `x ≠ y` of the layer at distance at least `2h`,
/// searches all boundary nodes `γ` for one whose truncated distance function
/// differs by at least `h/2` between `x` and `y`.
pub fn separation_audit<T: Real>(grid: &MetricGrid<T>, horizon: f64, sample_count: usize, seed: u64) -> Result<SeparationReport> {
    let depth = check_horizon(grid, horizon)?;
    let h = to_f64(grid.max_spacing());
    let layer: Vec<usize> = (0..depth.values.len()).filter(|&n| to_f64(depth.values[n]) < horizon).collect();
    let eligible: Vec<usize> = layer.iter().copied().filter(|&n| to_f64(depth.values[n]) < horizon - 2.0 * h).collect();
    let boundary: Vec<usize> = {
        let lat = grid.node_lattice();
        (0..lat.len()).filter(|&n| grid.is_boundary_node(lat.coords(n))).collect()
    };
    if eligible.len() < 2 {
        return Ok(SeparationReport {
            pairs: 0,
            separated: 0,
            fraction: 1.0,
            worst_gap: f64::INFINITY,
            excluded_near_cut: layer.len() - eligible.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<(usize, u64)> = (0..sample_count).map(|_| (eligible[rng.random_range(0..eligible.len())], rng.random())).collect();
    let gaps: Vec<Option<f64>> = seeds
        .par_iter()
        .map(|&(x, s)| -> Result<Option<f64>> {
            let dx = distance_from_nodes(grid, &[x])?;
            let far: Vec<usize> = eligible.iter().copied().filter(|&y| to_f64(dx.values[y]) >= 2.0 * h).collect();
            if far.is_empty() {
                return Ok(None);
            }
            let y = far[ChaCha8Rng::seed_from_u64(s).random_range(0..far.len())];
            let dy = distance_from_nodes(grid, &[y])?;
            Ok(Some(boundary.iter().fold(0.0f64, |m, &g| {
                let a = (horizon - to_f64(dx.values[g])).max(0.0);
                let b = (horizon - to_f64(dy.values[g])).max(0.0);
                m.max((a - b).abs())
            })))
        })
        .collect::<Result<_>>()?;
    let gaps: Vec<f64> = gaps.into_iter().flatten().collect();
    let separated = gaps.iter().filter(|&&g| g >= 0.5 * h).count();
    Ok(SeparationReport {
        pairs: gaps.len(),
        separated,
        fraction: if gaps.is_empty() { 1.0 } else { separated as f64 / gaps.len() as f64 },
        worst_gap: gaps.iter().cloned().fold(f64::INFINITY, f64::min),
        excluded_near_cut: layer.len() - eligible.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub patches: usize,
    pub injective: bool,
    /// Node pairs at distance `≥ 2h` whose tuples agree to within `h/2`.
    pub collisions: usize,
    pub example: Option<([usize; 3], [usize; 3])>,
    /// Patches left after greedy removal that keeps injectivity.
    pub minimal_family: Vec<String>,
    pub excluded_near_cut: usize,
}

struct Layer {
    pos: Vec<[f64; 3]>,
    coords: Vec<[usize; 3]>,
    tuples: Vec<Vec<f64>>,
}

fn collisions(layer: &Layer, active: &[usize], min_dist: f64, gap: f64) -> (usize, Option<(usize, usize)>) {
    let n = layer.pos.len();
    let counts: Vec<(usize, Option<(usize, usize)>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut c = 0;
            let mut ex = None;
            for j in i + 1..n {
                let (a, b) = (layer.pos[i], layer.pos[j]);
                let d2 = (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2);
                if d2 < min_dist * min_dist {
                    continue;
                }
                let (ti, tj) = (&layer.tuples[i], &layer.tuples[j]);
                if !active.iter().any(|&k| (ti[k] - tj[k]).abs() >= gap) {
                    c += 1;
                    ex.get_or_insert((i, j));
                }
            }
            (c, ex)
        })
        .collect();
    let total = counts.iter().map(|c| c.0).sum();
    (total, counts.iter().find_map(|c| c.1))
}

/// Injectivity of the patch family's tuple map on layer nodes at resolution
/// `h`, plus a greedy search for a smaller family that stays injective.
///
/// Node distances are bounded below by `|x − y| / √λ_max(g⁻¹)`; only pairs
/// whose bound reaches `2h` are tested.
pub fn density_audit<T: Real>(patches: &[PatchSpec], grid: &MetricGrid<T>, horizon: f64) -> Result<DensityReport> {
    let depth = check_horizon(grid, horizon)?;
    let h = to_f64(grid.max_spacing());
    let fields = distance_fields(grid, patches)?;
    let lat = grid.node_lattice();
    let scale = to_f64(grid.max_inverse_metric_eigenvalue()).sqrt();
    let mut layer = Layer { pos: Vec::new(), coords: Vec::new(), tuples: Vec::new() };
    let mut band = 0;
    for n in 0..lat.len() {
        let d = to_f64(depth.values[n]);
        if d >= horizon {
            continue;
        }
        if d >= horizon - 2.0 * h {
            band += 1;
            continue;
        }
        let p = lat.coords(n);
        let x = grid.node_position(p);
        layer.pos.push(std::array::from_fn(|a| to_f64(x[a]) / scale));
        layer.coords.push(p);
        layer.tuples.push(fields.iter().map(|f| (horizon - to_f64(f.values[n])).max(0.0)).collect());
    }
    let all: Vec<usize> = (0..patches.len()).collect();
    let (count, ex) = collisions(&layer, &all, 2.0 * h, 0.5 * h);
    let mut active = all.clone();
    if count == 0 {
        for k in (0..patches.len()).rev() {
            let trial: Vec<usize> = active.iter().copied().filter(|&i| i != k).collect();
            if !trial.is_empty() && collisions(&layer, &trial, 2.0 * h, 0.5 * h).0 == 0 {
                active = trial;
            }
        }
    }
    Ok(DensityReport {
        patches: patches.len(),
        injective: count == 0,
        collisions: count,
        example: ex.map(|(i, j)| (layer.coords[i], layer.coords[j])),
        minimal_family: if count == 0 { active.iter().map(|&i| patches[i].id.clone()).collect() } else { Vec::new() },
        excluded_near_cut: band,
    })
}
