use serde::{Deserialize, Serialize};

use super::grid::{MetricGrid, Lattice};
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Where samples of a field live on the staggered grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    Node,
    Edge,
    Face,
    Cell,
}

impl Placement {
    pub fn name(self) -> &'static str {
        match self {
            Placement::Node => "node",
            Placement::Edge => "edge",
            Placement::Face => "face",
            Placement::Cell => "cell",
        }
    }

    /// Sample lattice of component `a` (scalars use component 0).
    pub fn lattice<T: Real>(self, grid: &MetricGrid<T>, a: usize) -> Lattice {
        match self {
            Placement::Node => grid.node_lattice(),
            Placement::Cell => grid.cell_lattice(),
            Placement::Edge => grid.edge_lattice(a),
            Placement::Face => grid.face_lattice(a),
        }
    }

    /// Coordinates of sample `p` of component `a`.
    pub fn position<T: Real>(self, grid: &MetricGrid<T>, a: usize, p: [usize; 3]) -> [T; 3] {
        match self {
            Placement::Node => grid.node_position(p),
            Placement::Edge => grid.edge_midpoint(a, p),
            Placement::Face => grid.face_center(a, p),
            Placement::Cell => {
                let x = grid.node_position(p);
                let h = grid.spacing();
                std::array::from_fn(|b| x[b] + h[b] * lit(0.5))
            }
        }
    }
}

pub(crate) fn expect(expected: Placement, got: Placement) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Placement { expected: expected.name(), got: got.name() })
    }
}

/// Real samples of a scalar quantity on nodes or cells.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField<T> {
    pub placement: Placement,
    pub values: Vec<T>,
}

impl<T: Real> ScalarField<T> {
    pub fn zeros(grid: &MetricGrid<T>, placement: Placement) -> Self {
        assert!(matches!(placement, Placement::Node | Placement::Cell), "scalars live on nodes or cells");
        Self { placement, values: vec![T::zero(); placement.lattice(grid, 0).len()] }
    }

    pub fn from_fn(grid: &MetricGrid<T>, placement: Placement, f: impl Fn([T; 3]) -> T) -> Self {
        let lat = placement.lattice(grid, 0);
        let values = (0..lat.len()).map(|i| f(placement.position(grid, 0, lat.coords(i)))).collect();
        Self { placement, values }
    }

    pub fn validate(&self, grid: &MetricGrid<T>) -> Result<()> {
        if !matches!(self.placement, Placement::Node | Placement::Cell) {
            return Err(Error::Shape(format!("scalar field on {} placement", self.placement.name())));
        }
        let n = self.placement.lattice(grid, 0).len();
        if self.values.len() != n {
            return Err(Error::Shape(format!("scalar field has {} samples, grid needs {n}", self.values.len())));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape("scalar field has non-finite samples".into()));
        }
        Ok(())
    }

    pub fn max_abs(&self) -> T {
        crate::scalar::max_abs(&self.values)
    }
}

/// Contravariant vector samples. On edges (faces) component `a` lives on the
/// `a`-edges (`a`-faces); on nodes all three components are collocated.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField<T> {
    pub placement: Placement,
    pub comps: [Vec<T>; 3],
}

impl<T: Real> VectorField<T> {
    pub fn zeros(grid: &MetricGrid<T>, placement: Placement) -> Self {
        assert!(placement != Placement::Cell, "vector fields live on nodes, edges or faces");
        Self {
            placement,
            comps: std::array::from_fn(|a| vec![T::zero(); placement.lattice(grid, a).len()]),
        }
    }

    /// Samples an analytic contravariant field at the staggered positions.
    pub fn from_fn(grid: &MetricGrid<T>, placement: Placement, f: impl Fn([T; 3]) -> [T; 3]) -> Self {
        let comps = std::array::from_fn(|a| {
            let lat = placement.lattice(grid, a);
            (0..lat.len()).map(|i| f(placement.position(grid, a, lat.coords(i)))[a]).collect()
        });
        Self { placement, comps }
    }

    pub fn validate(&self, grid: &MetricGrid<T>) -> Result<()> {
        if self.placement == Placement::Cell {
            return Err(Error::Shape("vector field on cell placement".into()));
        }
        for a in 0..3 {
            let n = self.placement.lattice(grid, a).len();
            if self.comps[a].len() != n {
                return Err(Error::Shape(format!(
                    "component {a} has {} samples, {} placement needs {n}",
                    self.comps[a].len(),
                    self.placement.name()
                )));
            }
        }
        if self.comps.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Shape("vector field has non-finite samples".into()));
        }
        Ok(())
    }

    /// Concatenated component storage (the global edge/face ordering).
    pub fn flatten(&self) -> Vec<T> {
        self.comps.iter().flatten().copied().collect()
    }

    pub fn from_flat(grid: &MetricGrid<T>, placement: Placement, flat: &[T]) -> Result<Self> {
        let mut off = 0;
        let mut comps: [Vec<T>; 3] = Default::default();
        for (a, comp) in comps.iter_mut().enumerate() {
            let n = placement.lattice(grid, a).len();
            if off + n > flat.len() {
                return Err(Error::Shape(format!("flat vector too short ({})", flat.len())));
            }
            *comp = flat[off..off + n].to_vec();
            off += n;
        }
        if off != flat.len() {
            return Err(Error::Shape(format!("flat vector has {} entries, expected {off}", flat.len())));
        }
        Ok(Self { placement, comps })
    }

    pub fn max_abs(&self) -> T {
        self.comps.iter().fold(T::zero(), |m, c| m.max(crate::scalar::max_abs(c)))
    }

    pub fn scale(&mut self, s: T) {
        self.comps.iter_mut().flatten().for_each(|v| *v *= s);
    }

    /// First-order transfer to nodes: every node takes the staggered sample
    /// whose lower corner it is (the last sample along an axis is reused at the
    /// far boundary).
    pub fn to_nodes(&self, grid: &MetricGrid<T>) -> VectorField<T> {
        if self.placement == Placement::Node {
            return self.clone();
        }
        let nodes = grid.node_lattice();
        let comps = std::array::from_fn(|a| {
            let lat = self.placement.lattice(grid, a);
            (0..nodes.len())
                .map(|n| {
                    let p = nodes.coords(n);
                    let q = std::array::from_fn(|b| p[b].min(lat.shape[b] - 1));
                    self.comps[a][lat.index(q)]
                })
                .collect()
        });
        VectorField { placement: Placement::Node, comps }
    }
}

/// Node scalar averaged onto edge midpoints (flattened edge order).
pub fn nodes_to_edges<T: Real>(grid: &MetricGrid<T>, f: &[T]) -> Vec<T> {
    let nodes = grid.node_lattice();
    let mut out = Vec::with_capacity(grid.num_edges());
    for a in 0..3 {
        let lat = grid.edge_lattice(a);
        for i in 0..lat.len() {
            let p = lat.coords(i);
            out.push((f[nodes.index(p)] + f[nodes.index(super::grid::shift(p, a))]) * lit(0.5));
        }
    }
    out
}
