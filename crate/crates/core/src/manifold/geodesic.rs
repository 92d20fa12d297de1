use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::field::{Placement, ScalarField};
use super::grid::{inv3, MetricGrid};
use super::patch::BoundaryPatch;
use crate::error::{Error, Result};
use crate::scalar::{cmp, Real};

struct Entry<T> {
    key: T,
    node: usize,
}

impl<T: Real> PartialEq for Entry<T> {
    fn eq(&self, o: &Self) -> bool {
        cmp(&self.key, &o.key) == Ordering::Equal && self.node == o.node
    }
}
impl<T: Real> Eq for Entry<T> {}
impl<T: Real> PartialOrd for Entry<T> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<T: Real> Ord for Entry<T> {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, o: &Self) -> Ordering {
        cmp(&o.key, &self.key).then(o.node.cmp(&self.node))
    }
}

/// Solves `Σ w_a (t − t_a)₊² = 1` for the smallest admissible `t`.
fn upwind_update<T: Real>(mut cand: Vec<(T, T)>) -> Option<T> {
    cand.sort_by(|a, b| cmp(&a.0, &b.0));
    let mut best = None;
    let (mut sw, mut swt, mut swt2) = (T::zero(), T::zero(), T::zero());
    for (k, &(t, w)) in cand.iter().enumerate() {
        sw += w;
        swt += w * t;
        swt2 += w * t * t;
        // sw t² − 2 swt t + swt2 − 1 = 0
        let disc = swt * swt - sw * (swt2 - T::one());
        if disc < T::zero() {
            continue;
        }
        let root = (swt + disc.sqrt()) / sw;
        let next = cand.get(k + 1).map(|c| c.0);
        if root >= t && next.map_or(true, |n| root <= n) {
            best = Some(root);
            break;
        }
        best = Some(root);
    }
    best
}

/// Node field `τ[σ] = dist(·, σ)`.
///
/// Fast marching on the node lattice; each trial value is the minimum of the
/// first-order upwind quadratic update over the six axis neighbours and the
/// Dijkstra relaxation over all 26 neighbours with metric segment lengths.
/// The latter keeps `|τ(a) − τ(b)|` below the segment length between
/// neighbours.
pub fn geodesic_distance<T: Real>(grid: &MetricGrid<T>, patch: &BoundaryPatch<T>) -> Result<ScalarField<T>> {
    distance_from_nodes(grid, &patch.nodes(grid))
}

/// Distance to a set of seed nodes, by the same marching scheme.
pub fn distance_from_nodes<T: Real>(grid: &MetricGrid<T>, seeds: &[usize]) -> Result<ScalarField<T>> {
    if seeds.is_empty() {
        return Err(Error::EmptyPatch);
    }
    let nodes = grid.node_lattice();
    let n = nodes.len();
    let h = grid.spacing();
    let inf = T::max_value().unwrap_or_else(|| T::one() / T::min_value().unwrap_or(T::one()));
    let mut tau = vec![inf; n];
    let mut known = vec![false; n];
    let mut heap = BinaryHeap::new();
    for &s in seeds {
        tau[s] = T::zero();
        heap.push(Entry { key: T::zero(), node: s });
    }
    // g^{aa} / h_a² per node for the quadratic update
    let weights: Vec<[T; 3]> = (0..n)
        .map(|i| {
            let gi = inv3(grid.metric_at(i));
            std::array::from_fn(|a| gi[a][a] / (h[a] * h[a]))
        })
        .collect();

    let mut offsets = Vec::with_capacity(26);
    for dz in -1isize..=1 {
        for dy in -1isize..=1 {
            for dx in -1isize..=1 {
                if (dx, dy, dz) != (0, 0, 0) {
                    offsets.push([dx, dy, dz]);
                }
            }
        }
    }

    while let Some(Entry { key, node }) = heap.pop() {
        if known[node] || key > tau[node] {
            continue;
        }
        known[node] = true;
        let p = nodes.coords(node);
        for off in &offsets {
            let q = [p[0] as isize + off[0], p[1] as isize + off[1], p[2] as isize + off[2]];
            if !nodes.contains(q) {
                continue;
            }
            let q = [q[0] as usize, q[1] as usize, q[2] as usize];
            let qi = nodes.index(q);
            if known[qi] {
                continue;
            }
            let mut best = tau[node] + grid.segment_length(p, q);
            let mut cand = Vec::with_capacity(3);
            for a in 0..3 {
                let mut t_a: Option<T> = None;
                for d in [-1isize, 1] {
                    let r = q[a] as isize + d;
                    if r < 0 || r as usize >= nodes.shape[a] {
                        continue;
                    }
                    let mut s = q;
                    s[a] = r as usize;
                    let si = nodes.index(s);
                    if known[si] {
                        t_a = Some(t_a.map_or(tau[si], |t: T| t.min(tau[si])));
                    }
                }
                if let Some(t) = t_a {
                    cand.push((t, weights[qi][a]));
                }
            }
            if let Some(t) = upwind_update(cand) {
                best = best.min(t);
            }
            if best < tau[qi] {
                tau[qi] = best;
                heap.push(Entry { key: best, node: qi });
            }
        }
    }
    Ok(ScalarField { placement: Placement::Node, values: tau })
}

/// `τ̃^T[σ] = max(T − τ[σ], 0)`.
pub fn eikonal_function<T: Real>(grid: &MetricGrid<T>, patch: &BoundaryPatch<T>, t: T) -> Result<ScalarField<T>> {
    if !(t > T::zero()) {
        return Err(Error::Config(format!("eikonal horizon must be positive, got {t}")));
    }
    let tau = geodesic_distance(grid, patch)?;
    Ok(truncate(&tau, t))
}

pub fn truncate<T: Real>(tau: &ScalarField<T>, t: T) -> ScalarField<T> {
    ScalarField {
        placement: Placement::Node,
        values: tau.values.iter().map(|&d| (t - d).max(T::zero())).collect(),
    }
}

/// Indicator of the domain of influence `{x : τ[σ](x) < s}`.
#[derive(Clone, Debug, PartialEq)]
pub struct InfluenceMask<T> {
    pub patch: String,
    pub radius: T,
    pub indicator: Vec<bool>,
}

impl<T: Real> InfluenceMask<T> {
    pub fn from_distance(patch: &str, tau: &ScalarField<T>, s: T) -> Self {
        let indicator = if s <= T::zero() {
            vec![false; tau.values.len()]
        } else {
            tau.values.iter().map(|&d| d < s).collect()
        };
        Self { patch: patch.to_string(), radius: s, indicator }
    }

    pub fn count(&self) -> usize {
        self.indicator.iter().filter(|&&b| b).count()
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.indicator.iter().zip(&other.indicator).all(|(&a, &b)| !a || b)
    }
}

pub fn influence_mask<T: Real>(grid: &MetricGrid<T>, patch: &BoundaryPatch<T>, s: T) -> Result<InfluenceMask<T>> {
    let tau = geodesic_distance(grid, patch)?;
    Ok(InfluenceMask::from_distance(&patch.id, &tau, s))
}
