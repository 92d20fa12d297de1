use serde::{Deserialize, Serialize};

use super::grid::{inv3, MetricGrid, Tensor};
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// One of the six sides of the box: the plane `x_axis = 0` or `x_axis = L_axis`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Side {
    pub axis: usize,
    pub high: bool,
}

impl Side {
    pub fn all() -> [Side; 6] {
        std::array::from_fn(|i| Side { axis: i / 2, high: i % 2 == 1 })
    }

    pub fn name(self) -> String {
        format!("{}{}", ["x", "y", "z"][self.axis], if self.high { 1 } else { 0 })
    }

    /// The two tangential axes, in cyclic order.
    pub fn tangents(self) -> [usize; 2] {
        [(self.axis + 1) % 3, (self.axis + 2) % 3]
    }

    /// Node index of the plane along the normal axis.
    pub fn layer<T: Real>(self, grid: &MetricGrid<T>) -> usize {
        if self.high {
            grid.dims()[self.axis]
        } else {
            0
        }
    }
}

/// Rectangle on a side, in fractions of the side's extent along its two
/// tangential axes (see [`Side::tangents`]).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub side: Side,
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Rect {
    pub fn full(side: Side) -> Self {
        Self { side, lo: [0.0; 2], hi: [1.0; 2] }
    }

    /// Quarter `(i, j)` of a side, `i, j ∈ {0, 1}`.
    pub fn quarter(side: Side, i: usize, j: usize) -> Self {
        let lo = [0.5 * i as f64, 0.5 * j as f64];
        Self { side, lo, hi: [lo[0] + 0.5, lo[1] + 0.5] }
    }

    /// Tile `(i, j)` of an `m × m` subdivision of a side.
    pub fn tile(side: Side, m: usize, i: usize, j: usize) -> Self {
        let w = 1.0 / m as f64;
        Self { side, lo: [w * i as f64, w * j as f64], hi: [w * (i + 1) as f64, w * (j + 1) as f64] }
    }

    /// Local coordinates in `[0, 1]²` of a point on the side, `None` outside.
    pub fn local<T: Real>(&self, grid: &MetricGrid<T>, x: [T; 3]) -> Option<[f64; 2]> {
        let ext = grid.extent();
        let t = self.side.tangents();
        let mut out = [0.0; 2];
        for k in 0..2 {
            let f = crate::scalar::to_f64(x[t[k]] / ext[t[k]]);
            let u = (f - self.lo[k]) / (self.hi[k] - self.lo[k]);
            if !(-1e-9..=1.0 + 1e-9).contains(&u) {
                return None;
            }
            out[k] = u.clamp(0.0, 1.0);
        }
        Some(out)
    }

    fn validate(&self) -> Result<()> {
        let ok = self.side.axis < 3
            && (0..2).all(|k| 0.0 <= self.lo[k] && self.lo[k] < self.hi[k] && self.hi[k] <= 1.0);
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("bad patch rectangle {self:?}")))
        }
    }
}

/// Serializable description of a boundary patch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatchSpec {
    pub id: String,
    pub rects: Vec<Rect>,
}

impl PatchSpec {
    pub fn side(side: Side) -> Self {
        Self { id: side.name(), rects: vec![Rect::full(side)] }
    }

    pub fn quarter(side: Side, i: usize, j: usize) -> Self {
        Self { id: format!("{}.q{i}{j}", side.name()), rects: vec![Rect::quarter(side, i, j)] }
    }

    pub fn whole_boundary() -> Self {
        Self { id: "boundary".into(), rects: Side::all().iter().map(|&s| Rect::full(s)).collect() }
    }

    /// The six sides followed by the four quarters of every side.
    pub fn default_family() -> Vec<Self> {
        let mut v: Vec<Self> = Side::all().iter().map(|&s| Self::side(s)).collect();
        for s in Side::all() {
            for (i, j) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                v.push(Self::quarter(s, i, j));
            }
        }
        v
    }

    pub fn sides() -> Vec<Self> {
        Side::all().iter().map(|&s| Self::side(s)).collect()
    }
}

/// Set of boundary faces with their inward unit normals.
#[derive(Clone, Debug)]
pub struct BoundaryPatch<T: Real> {
    pub id: String,
    pub rects: Vec<Rect>,
    /// Flattened indices of boundary faces, sorted.
    pub faces: Vec<usize>,
    /// Inward unit normal (contravariant) at each face centre.
    pub normals: Vec<[T; 3]>,
}

fn face_metric_tensor<T: Real>(grid: &MetricGrid<T>, a: usize, p: [usize; 3]) -> Tensor<T> {
    let nodes = grid.node_lattice();
    let (b, c) = ((a + 1) % 3, (a + 2) % 3);
    let mut g = [[T::zero(); 3]; 3];
    for d in 0..4 {
        let mut q = p;
        q[b] += d & 1;
        q[c] += d >> 1;
        let m = grid.metric_at(nodes.index(q));
        for i in 0..3 {
            for j in 0..3 {
                g[i][j] += m[i][j] * lit(0.25);
            }
        }
    }
    g
}

impl<T: Real> BoundaryPatch<T> {
    pub fn new(grid: &MetricGrid<T>, spec: &PatchSpec) -> Result<Self> {
        for r in &spec.rects {
            r.validate()?;
        }
        let mut faces = Vec::new();
        for r in &spec.rects {
            let a = r.side.axis;
            let lat = grid.face_lattice(a);
            let layer = r.side.layer(grid);
            for i in 0..lat.len() {
                let p = lat.coords(i);
                if p[a] != layer {
                    continue;
                }
                if r.local(grid, grid.face_center(a, p)).is_some() {
                    faces.push(grid.face(a, p));
                }
            }
        }
        faces.sort_unstable();
        faces.dedup();
        if faces.is_empty() {
            return Err(Error::EmptyPatch);
        }
        let normals = faces
            .iter()
            .map(|&f| {
                let (a, p) = grid.face_coords(f);
                let gi = inv3(&face_metric_tensor(grid, a, p));
                let sign = if p[a] == 0 { T::one() } else { -T::one() };
                let s = sign / gi[a][a].sqrt();
                std::array::from_fn(|j| gi[j][a] * s)
            })
            .collect();
        Ok(Self { id: spec.id.clone(), rects: spec.rects.clone(), faces, normals })
    }

    pub fn spec(&self) -> PatchSpec {
        PatchSpec { id: self.id.clone(), rects: self.rects.clone() }
    }

    /// Corner nodes of the patch faces (flattened node indices, sorted).
    pub fn nodes(&self, grid: &MetricGrid<T>) -> Vec<usize> {
        let nodes = grid.node_lattice();
        let mut out = Vec::with_capacity(self.faces.len() * 4);
        for &f in &self.faces {
            let (a, p) = grid.face_coords(f);
            let (b, c) = ((a + 1) % 3, (a + 2) % 3);
            for d in 0..4 {
                let mut q = p;
                q[b] += d & 1;
                q[c] += d >> 1;
                out.push(nodes.index(q));
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Metric length of the normal at face `k` (should be one).
    pub fn normal_length(&self, grid: &MetricGrid<T>, k: usize) -> T {
        let (a, p) = grid.face_coords(self.faces[k]);
        let g = face_metric_tensor(grid, a, p);
        let n = self.normals[k];
        let mut s = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                s += g[i][j] * n[i] * n[j];
            }
        }
        s.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::MetricSpec;

    #[test]
    fn quarter_has_quarter_of_faces() {
        let g = MetricGrid::<f64>::unit_cube(8, MetricSpec::Identity).unwrap();
        let full = BoundaryPatch::new(&g, &PatchSpec::side(Side { axis: 2, high: false })).unwrap();
        let q = BoundaryPatch::new(&g, &PatchSpec::quarter(Side { axis: 2, high: false }, 1, 0)).unwrap();
        assert_eq!(full.faces.len(), 64);
        assert_eq!(q.faces.len(), 16);
        assert_eq!(full.nodes(&g).len(), 81);
        assert_eq!(full.normals[0], [0.0, 0.0, 1.0]);
        let all = BoundaryPatch::new(&g, &PatchSpec::whole_boundary()).unwrap();
        assert_eq!(all.faces.len(), 6 * 64);
        assert_eq!(all.nodes(&g).len(), 9usize.pow(3) - 7usize.pow(3));
    }

    #[test]
    fn normals_have_unit_metric_length() {
        let g = MetricGrid::<f64>::unit_cube(6, MetricSpec::ConformalSine { amplitude: 0.3, axis: 1 }).unwrap();
        let p = BoundaryPatch::new(&g, &PatchSpec::whole_boundary()).unwrap();
        for k in 0..p.faces.len() {
            assert!((p.normal_length(&g, k) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_patch_is_an_error() {
        let g = MetricGrid::<f64>::unit_cube(4, MetricSpec::Identity).unwrap();
        let spec = PatchSpec {
            id: "sliver".into(),
            rects: vec![Rect { side: Side { axis: 0, high: true }, lo: [0.01, 0.01], hi: [0.02, 0.02] }],
        };
        assert!(matches!(BoundaryPatch::new(&g, &spec), Err(Error::EmptyPatch)));
    }
}
