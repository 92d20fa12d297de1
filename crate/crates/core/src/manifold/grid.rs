use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Row-major-free index arithmetic for a 3D block of samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Lattice {
    pub shape: [usize; 3],
}

impl Lattice {
    pub const fn new(shape: [usize; 3]) -> Self {
        Self { shape }
    }

    pub fn len(&self) -> usize {
        self.shape[0] * self.shape[1] * self.shape[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline(always)]
    pub fn index(&self, p: [usize; 3]) -> usize {
        debug_assert!(p[0] < self.shape[0] && p[1] < self.shape[1] && p[2] < self.shape[2]);
        p[0] + self.shape[0] * (p[1] + self.shape[1] * p[2])
    }

    #[inline(always)]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.shape[0];
        let r = idx / self.shape[0];
        [i, r % self.shape[1], r / self.shape[1]]
    }

    pub fn contains(&self, p: [isize; 3]) -> bool {
        (0..3).all(|a| p[a] >= 0 && (p[a] as usize) < self.shape[a])
    }
}

/// Analytic metric families accepted by [`MetricGrid::new`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricSpec {
    Identity,
    /// `g = (1 + amplitude·sin(π x_axis))·Id`.
    ConformalSine { amplitude: f64, axis: usize },
    /// `g_ii = 1 + amplitudes[i]·sin(π x_i)`, off-diagonal zero.
    DiagonalSine { amplitudes: [f64; 3] },
    /// Spatially constant tensor.
    Constant { g: [[f64; 3]; 3] },
}

impl MetricSpec {
    pub fn eval(&self, x: [f64; 3]) -> [[f64; 3]; 3] {
        use std::f64::consts::PI;
        let diag = |d: [f64; 3]| [[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]];
        match self {
            MetricSpec::Identity => diag([1.0; 3]),
            MetricSpec::ConformalSine { amplitude, axis } => {
                let c = 1.0 + amplitude * (PI * x[*axis]).sin();
                diag([c; 3])
            }
            MetricSpec::DiagonalSine { amplitudes } => {
                diag(std::array::from_fn(|i| 1.0 + amplitudes[i] * (PI * x[i]).sin()))
            }
            MetricSpec::Constant { g } => *g,
        }
    }

    pub fn is_diagonal(&self) -> bool {
        match self {
            MetricSpec::Constant { g } => {
                (0..3).all(|i| (0..3).all(|j| i == j || g[i][j] == 0.0))
            }
            _ => true,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            MetricSpec::ConformalSine { axis, .. } if *axis > 2 => {
                Err(Error::Config(format!("metric axis {axis} out of range")))
            }
            MetricSpec::Constant { g } => {
                for i in 0..3 {
                    for j in 0..3 {
                        if g[i][j] != g[j][i] {
                            return Err(Error::Config("constant metric is not symmetric".into()));
                        }
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

pub type Tensor<T> = [[T; 3]; 3];

pub fn det3<T: Real>(g: &Tensor<T>) -> T {
    g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
        + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0])
}

pub fn inv3<T: Real>(g: &Tensor<T>) -> Tensor<T> {
    let d = det3(g);
    [
        [
            (g[1][1] * g[2][2] - g[1][2] * g[2][1]) / d,
            (g[0][2] * g[2][1] - g[0][1] * g[2][2]) / d,
            (g[0][1] * g[1][2] - g[0][2] * g[1][1]) / d,
        ],
        [
            (g[1][2] * g[2][0] - g[1][0] * g[2][2]) / d,
            (g[0][0] * g[2][2] - g[0][2] * g[2][0]) / d,
            (g[0][2] * g[1][0] - g[0][0] * g[1][2]) / d,
        ],
        [
            (g[1][0] * g[2][1] - g[1][1] * g[2][0]) / d,
            (g[0][1] * g[2][0] - g[0][0] * g[2][1]) / d,
            (g[0][0] * g[1][1] - g[0][1] * g[1][0]) / d,
        ],
    ]
}

fn sym_eigenvalues(g: &[[f64; 3]; 3]) -> [f64; 3] {
    let m = nalgebra::Matrix3::from_fn(|i, j| g[i][j]);
    let e = m.symmetric_eigenvalues();
    [e[0], e[1], e[2]]
}

/// Box domain `[0, n_x h_x] × [0, n_y h_y] × [0, n_z h_z]` with a metric tensor
/// sampled at the nodes and the staggered (Yee) layout of degrees of freedom:
/// scalars on nodes or cells, 1-form-like vectors on edges, 2-form-like vectors
/// on faces.
///
/// Metric values at staggered locations are averages of the incident nodes.
/// The discrete Hodge weights use the diagonal of the averaged tensor.
#[derive(Clone, Debug)]
pub struct MetricGrid<T: Real> {
    dims: [usize; 3],
    spacing: [T; 3],
    spec: MetricSpec,
    metric: Vec<Tensor<T>>,
    node_sqrtg: Vec<T>,
    edge_g: [Vec<T>; 3],
    edge_sqrtg: [Vec<T>; 3],
    face_g: [Vec<T>; 3],
    face_sqrtg: [Vec<T>; 3],
    cell_sqrtg: Vec<T>,
    max_inv_eig: T,
}

pub const UNIT: [[usize; 3]; 3] = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];

#[inline(always)]
pub fn shift(p: [usize; 3], a: usize) -> [usize; 3] {
    let mut q = p;
    q[a] += 1;
    q
}

impl<T: Real> MetricGrid<T> {
    /// Builds the grid and validates the metric (SPD everywhere, less than 50%
    /// variation between neighbouring nodes).
    pub fn new(dims: [usize; 3], spacing: [f64; 3], spec: MetricSpec) -> Result<Self> {
        if dims.iter().any(|&n| n < 4) {
            return Err(Error::Config(format!("grid dims {dims:?} must be at least 4 per axis")));
        }
        if spacing.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(Error::Config(format!("grid spacing {spacing:?} must be positive")));
        }
        spec.validate()?;
        let nodes = Lattice::new([dims[0] + 1, dims[1] + 1, dims[2] + 1]);
        let mut metric64 = Vec::with_capacity(nodes.len());
        let mut min_eig = f64::INFINITY;
        for idx in 0..nodes.len() {
            let p = nodes.coords(idx);
            let x = std::array::from_fn(|a| p[a] as f64 * spacing[a]);
            let g = spec.eval(x);
            let ev = sym_eigenvalues(&g);
            let lo = ev.iter().cloned().fold(f64::INFINITY, f64::min);
            if !(lo > 0.0) || g.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::NonSpdMetric { node: p, min_eigenvalue: lo });
            }
            min_eig = min_eig.min(lo);
            metric64.push(g);
        }
        // Smoothness guard between 6-neighbours.
        let norm = |g: &[[f64; 3]; 3]| g.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        for idx in 0..nodes.len() {
            let p = nodes.coords(idx);
            for a in 0..3 {
                if p[a] + 1 < nodes.shape[a] {
                    let q = shift(p, a);
                    let (ga, gb) = (&metric64[idx], &metric64[nodes.index(q)]);
                    let mut diff = 0.0f64;
                    for i in 0..3 {
                        for j in 0..3 {
                            diff = diff.max((ga[i][j] - gb[i][j]).abs());
                        }
                    }
                    let ratio = diff / norm(ga).min(norm(gb));
                    if ratio >= 0.5 {
                        return Err(Error::RoughMetric { a: p, b: q, ratio });
                    }
                }
            }
        }

        let metric: Vec<Tensor<T>> = metric64
            .iter()
            .map(|g| std::array::from_fn(|i| std::array::from_fn(|j| lit(g[i][j]))))
            .collect();
        let node_sqrtg: Vec<T> = metric.iter().map(|g| det3(g).sqrt()).collect();
        let spacing_t: [T; 3] = std::array::from_fn(|a| lit(spacing[a]));

        let average = |corners: &[usize], f: &dyn Fn(usize) -> T| -> T {
            let s = corners.iter().fold(T::zero(), |s, &c| s + f(c));
            s / lit::<T>(corners.len() as f64)
        };

        let mut grid = Self {
            dims,
            spacing: spacing_t,
            spec,
            metric,
            node_sqrtg,
            edge_g: Default::default(),
            edge_sqrtg: Default::default(),
            face_g: Default::default(),
            face_sqrtg: Default::default(),
            cell_sqrtg: Vec::new(),
            max_inv_eig: lit(1.0 / min_eig),
        };

        for a in 0..3 {
            let lat = grid.edge_lattice(a);
            let mut g = Vec::with_capacity(lat.len());
            let mut s = Vec::with_capacity(lat.len());
            for idx in 0..lat.len() {
                let p = lat.coords(idx);
                let c = [nodes.index(p), nodes.index(shift(p, a))];
                g.push(average(&c, &|n| grid.metric[n][a][a]));
                s.push(average(&c, &|n| grid.node_sqrtg[n]));
            }
            grid.edge_g[a] = g;
            grid.edge_sqrtg[a] = s;

            let lat = grid.face_lattice(a);
            let (b, c) = ((a + 1) % 3, (a + 2) % 3);
            let mut g = Vec::with_capacity(lat.len());
            let mut s = Vec::with_capacity(lat.len());
            for idx in 0..lat.len() {
                let p = lat.coords(idx);
                let corners = [
                    nodes.index(p),
                    nodes.index(shift(p, b)),
                    nodes.index(shift(p, c)),
                    nodes.index(shift(shift(p, b), c)),
                ];
                g.push(average(&corners, &|n| grid.metric[n][a][a]));
                s.push(average(&corners, &|n| grid.node_sqrtg[n]));
            }
            grid.face_g[a] = g;
            grid.face_sqrtg[a] = s;
        }
        let cells = grid.cell_lattice();
        grid.cell_sqrtg = (0..cells.len())
            .map(|idx| {
                let p = cells.coords(idx);
                let mut corners = Vec::with_capacity(8);
                for d in 0..8usize {
                    corners.push(nodes.index([p[0] + (d & 1), p[1] + ((d >> 1) & 1), p[2] + (d >> 2)]));
                }
                average(&corners, &|n| grid.node_sqrtg[n])
            })
            .collect();
        Ok(grid)
    }

    /// Flat unit cube with `n` cells per axis.
    pub fn unit_cube(n: usize, spec: MetricSpec) -> Result<Self> {
        let h = 1.0 / n as f64;
        Self::new([n; 3], [h; 3], spec)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> [T; 3] {
        self.spacing
    }

    pub fn min_spacing(&self) -> T {
        self.spacing[0].min(self.spacing[1]).min(self.spacing[2])
    }

    pub fn max_spacing(&self) -> T {
        self.spacing[0].max(self.spacing[1]).max(self.spacing[2])
    }

    pub fn spec(&self) -> &MetricSpec {
        &self.spec
    }

    pub fn extent(&self) -> [T; 3] {
        std::array::from_fn(|a| self.spacing[a] * lit(self.dims[a] as f64))
    }

    /// Largest eigenvalue of `g⁻¹` over all nodes.
    pub fn max_inverse_metric_eigenvalue(&self) -> T {
        self.max_inv_eig
    }

    pub fn cell_volume(&self) -> T {
        self.spacing[0] * self.spacing[1] * self.spacing[2]
    }

    pub fn node_lattice(&self) -> Lattice {
        Lattice::new([self.dims[0] + 1, self.dims[1] + 1, self.dims[2] + 1])
    }

    pub fn cell_lattice(&self) -> Lattice {
        Lattice::new(self.dims)
    }

    /// Edges parallel to axis `a`, indexed by their lower node.
    pub fn edge_lattice(&self, a: usize) -> Lattice {
        let mut s = [self.dims[0] + 1, self.dims[1] + 1, self.dims[2] + 1];
        s[a] = self.dims[a];
        Lattice::new(s)
    }

    /// Faces with normal along axis `a`, indexed by their lower corner node.
    pub fn face_lattice(&self, a: usize) -> Lattice {
        let mut s = self.dims;
        s[a] = self.dims[a] + 1;
        Lattice::new(s)
    }

    pub fn num_nodes(&self) -> usize {
        self.node_lattice().len()
    }

    pub fn num_cells(&self) -> usize {
        self.cell_lattice().len()
    }

    pub fn edge_offset(&self, a: usize) -> usize {
        (0..a).map(|b| self.edge_lattice(b).len()).sum()
    }

    pub fn face_offset(&self, a: usize) -> usize {
        (0..a).map(|b| self.face_lattice(b).len()).sum()
    }

    pub fn num_edges(&self) -> usize {
        self.edge_offset(3)
    }

    pub fn num_faces(&self) -> usize {
        self.face_offset(3)
    }

    /// Global (flattened) edge index.
    #[inline]
    pub fn edge(&self, a: usize, p: [usize; 3]) -> usize {
        self.edge_offset(a) + self.edge_lattice(a).index(p)
    }

    #[inline]
    pub fn face(&self, a: usize, p: [usize; 3]) -> usize {
        self.face_offset(a) + self.face_lattice(a).index(p)
    }

    /// Axis and lower node of a flattened edge index.
    pub fn edge_coords(&self, e: usize) -> (usize, [usize; 3]) {
        let mut off = 0;
        for a in 0..3 {
            let lat = self.edge_lattice(a);
            if e < off + lat.len() {
                return (a, lat.coords(e - off));
            }
            off += lat.len();
        }
        panic!("edge index {e} out of range")
    }

    pub fn face_coords(&self, f: usize) -> (usize, [usize; 3]) {
        let mut off = 0;
        for a in 0..3 {
            let lat = self.face_lattice(a);
            if f < off + lat.len() {
                return (a, lat.coords(f - off));
            }
            off += lat.len();
        }
        panic!("face index {f} out of range")
    }

    pub fn node_position(&self, p: [usize; 3]) -> [T; 3] {
        std::array::from_fn(|a| self.spacing[a] * lit(p[a] as f64))
    }

    pub fn edge_midpoint(&self, a: usize, p: [usize; 3]) -> [T; 3] {
        let mut x = self.node_position(p);
        x[a] += self.spacing[a] * lit(0.5);
        x
    }

    pub fn face_center(&self, a: usize, p: [usize; 3]) -> [T; 3] {
        let mut x = self.node_position(p);
        for b in 0..3 {
            if b != a {
                x[b] += self.spacing[b] * lit(0.5);
            }
        }
        x
    }

    /// Metric tensor at node `n` (flattened node index).
    pub fn metric_at(&self, n: usize) -> &Tensor<T> {
        &self.metric[n]
    }

    pub fn node_sqrt_det(&self) -> &[T] {
        &self.node_sqrtg
    }

    /// `g_aa` at the midpoints of `a`-edges.
    pub fn edge_metric(&self, a: usize) -> &[T] {
        &self.edge_g[a]
    }

    pub fn edge_sqrt_det(&self, a: usize) -> &[T] {
        &self.edge_sqrtg[a]
    }

    pub fn face_metric(&self, a: usize) -> &[T] {
        &self.face_g[a]
    }

    pub fn face_sqrt_det(&self, a: usize) -> &[T] {
        &self.face_sqrtg[a]
    }

    pub fn cell_sqrt_det(&self) -> &[T] {
        &self.cell_sqrtg
    }

    /// Whether node coordinate `i` along axis `a` lies on the boundary.
    #[inline]
    pub fn on_boundary(&self, a: usize, i: usize) -> bool {
        i == 0 || i == self.dims[a]
    }

    pub fn is_boundary_node(&self, p: [usize; 3]) -> bool {
        (0..3).any(|a| self.on_boundary(a, p[a]))
    }

    /// Edge lies inside the boundary surface (tangential boundary edge).
    pub fn is_boundary_edge(&self, a: usize, p: [usize; 3]) -> bool {
        (0..3).any(|b| b != a && self.on_boundary(b, p[b]))
    }

    fn dual_fraction(&self, p: [usize; 3], axes: impl Iterator<Item = usize>) -> T {
        axes.fold(T::one(), |f, b| if self.on_boundary(b, p[b]) { f * lit(0.5) } else { f })
    }

    /// Metric-weighted volume of the dual cell of every node (`√g · V_dual`).
    pub fn node_mass(&self) -> Vec<T> {
        let lat = self.node_lattice();
        let v = self.cell_volume();
        (0..lat.len())
            .map(|n| self.node_sqrtg[n] * v * self.dual_fraction(lat.coords(n), 0..3))
            .collect()
    }

    /// Hodge weights for edge vectors: `g_aa √g V_dual` (flattened edge order).
    pub fn edge_mass(&self) -> Vec<T> {
        let v = self.cell_volume();
        let mut out = Vec::with_capacity(self.num_edges());
        for a in 0..3 {
            let lat = self.edge_lattice(a);
            for idx in 0..lat.len() {
                let p = lat.coords(idx);
                let frac = self.dual_fraction(p, (0..3).filter(|&b| b != a));
                out.push(self.edge_g[a][idx] * self.edge_sqrtg[a][idx] * v * frac);
            }
        }
        out
    }

    /// Hodge weights for face vectors: `g_aa √g V_dual` (flattened face order).
    pub fn face_mass(&self) -> Vec<T> {
        let v = self.cell_volume();
        let mut out = Vec::with_capacity(self.num_faces());
        for a in 0..3 {
            let lat = self.face_lattice(a);
            for idx in 0..lat.len() {
                let p = lat.coords(idx);
                let frac = self.dual_fraction(p, std::iter::once(a));
                out.push(self.face_g[a][idx] * self.face_sqrtg[a][idx] * v * frac);
            }
        }
        out
    }

    pub fn cell_mass(&self) -> Vec<T> {
        let v = self.cell_volume();
        self.cell_sqrtg.iter().map(|s| *s * v).collect()
    }

    /// Length of the straight coordinate segment between two nodes in the
    /// metric averaged over its endpoints.
    pub fn segment_length(&self, p: [usize; 3], q: [usize; 3]) -> T {
        let nodes = self.node_lattice();
        let (gp, gq) = (&self.metric[nodes.index(p)], &self.metric[nodes.index(q)]);
        let d: [T; 3] = std::array::from_fn(|a| {
            self.spacing[a] * (lit::<T>(q[a] as f64) - lit::<T>(p[a] as f64))
        });
        let mut s = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                s += (gp[i][j] + gq[i][j]) * lit(0.5) * d[i] * d[j];
            }
        }
        s.sqrt()
    }
}
