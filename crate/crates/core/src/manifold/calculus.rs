//! Mimetic difference operators on the staggered grid.
//!
//! The primal operators are exact cochain differences wrapped in diagonal
//! metric weights, so `curl ∘ grad = 0` and `div ∘ curl = 0` hold to rounding.
//! Dual operators are the mass-weighted transposes.

use super::field::{expect, Placement, ScalarField, VectorField};
use super::grid::{det3, shift, MetricGrid};
use super::sparse::Csr;
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

#[derive(Clone, Debug)]
pub struct Calculus<T: Real> {
    grid: MetricGrid<T>,
    /// node → edge
    pub grad: Csr<T>,
    /// edge → face
    pub curl: Csr<T>,
    /// face → cell
    pub div: Csr<T>,
    curl_t: Csr<T>,
    grad_t: Csr<T>,
    pub node_mass: Vec<T>,
    pub edge_mass: Vec<T>,
    pub face_mass: Vec<T>,
    pub cell_mass: Vec<T>,
}

fn grad_matrix<T: Real>(g: &MetricGrid<T>) -> Csr<T> {
    let nodes = g.node_lattice();
    let h = g.spacing();
    let mut rows = Vec::with_capacity(g.num_edges());
    for a in 0..3 {
        let lat = g.edge_lattice(a);
        let gaa = g.edge_metric(a);
        for i in 0..lat.len() {
            let p = lat.coords(i);
            let w = T::one() / (h[a] * gaa[i]);
            rows.push(vec![(nodes.index(p), -w), (nodes.index(shift(p, a)), w)]);
        }
    }
    Csr::from_rows(nodes.len(), rows)
}

fn curl_matrix<T: Real>(g: &MetricGrid<T>) -> Csr<T> {
    let h = g.spacing();
    let mut rows = Vec::with_capacity(g.num_faces());
    for a in 0..3 {
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        let lat = g.face_lattice(a);
        let sg = g.face_sqrt_det(a);
        let (lb, lc) = (g.edge_lattice(b), g.edge_lattice(c));
        let (gb, gc) = (g.edge_metric(b), g.edge_metric(c));
        for i in 0..lat.len() {
            let p = lat.coords(i);
            let s = T::one() / sg[i];
            // ∂_b Y_c − ∂_c Y_b with Y_k = g_kk y^k
            let (c0, c1) = (lc.index(p), lc.index(shift(p, b)));
            let (b0, b1) = (lb.index(p), lb.index(shift(p, c)));
            let oc = g.edge_offset(c);
            let ob = g.edge_offset(b);
            rows.push(vec![
                (oc + c1, s * gc[c1] / h[b]),
                (oc + c0, -s * gc[c0] / h[b]),
                (ob + b1, -s * gb[b1] / h[c]),
                (ob + b0, s * gb[b0] / h[c]),
            ]);
        }
    }
    Csr::from_rows(g.num_edges(), rows)
}

fn div_matrix<T: Real>(g: &MetricGrid<T>) -> Csr<T> {
    let cells = g.cell_lattice();
    let h = g.spacing();
    let sc = g.cell_sqrt_det();
    let mut rows = Vec::with_capacity(cells.len());
    for i in 0..cells.len() {
        let p = cells.coords(i);
        let mut row = Vec::with_capacity(6);
        for a in 0..3 {
            let lat = g.face_lattice(a);
            let sf = g.face_sqrt_det(a);
            let (f0, f1) = (lat.index(p), lat.index(shift(p, a)));
            let o = g.face_offset(a);
            let w = T::one() / (h[a] * sc[i]);
            row.push((o + f1, w * sf[f1]));
            row.push((o + f0, -w * sf[f0]));
        }
        rows.push(row);
    }
    Csr::from_rows(g.num_faces(), rows)
}

impl<T: Real> Calculus<T> {
    pub fn new(grid: &MetricGrid<T>) -> Self {
        let grad = grad_matrix(grid);
        let curl = curl_matrix(grid);
        Self {
            grad_t: grad.transpose(),
            curl_t: curl.transpose(),
            grad,
            curl,
            div: div_matrix(grid),
            node_mass: grid.node_mass(),
            edge_mass: grid.edge_mass(),
            face_mass: grid.face_mass(),
            cell_mass: grid.cell_mass(),
            grid: grid.clone(),
        }
    }

    pub fn grid(&self) -> &MetricGrid<T> {
        &self.grid
    }

    pub fn mass(&self, placement: Placement) -> &[T] {
        match placement {
            Placement::Node => &self.node_mass,
            Placement::Edge => &self.edge_mass,
            Placement::Face => &self.face_mass,
            Placement::Cell => &self.cell_mass,
        }
    }

    /// Edge field → face field.
    pub fn curl(&self, y: &VectorField<T>) -> Result<VectorField<T>> {
        expect(Placement::Edge, y.placement)?;
        y.validate(&self.grid)?;
        VectorField::from_flat(&self.grid, Placement::Face, &self.curl.apply(&y.flatten()))
    }

    /// Face field → cell scalar.
    pub fn div(&self, y: &VectorField<T>) -> Result<ScalarField<T>> {
        expect(Placement::Face, y.placement)?;
        y.validate(&self.grid)?;
        Ok(ScalarField { placement: Placement::Cell, values: self.div.apply(&y.flatten()) })
    }

    /// Node scalar → edge field.
    pub fn grad(&self, phi: &ScalarField<T>) -> Result<VectorField<T>> {
        expect(Placement::Node, phi.placement)?;
        phi.validate(&self.grid)?;
        VectorField::from_flat(&self.grid, Placement::Edge, &self.grad.apply(&phi.values))
    }

    /// Face field → edge field, the adjoint of `curl` in the Hodge inner products.
    pub fn curl_dual(&self, v: &VectorField<T>) -> Result<VectorField<T>> {
        expect(Placement::Face, v.placement)?;
        v.validate(&self.grid)?;
        let out = self.curl_dual_flat(&v.flatten());
        VectorField::from_flat(&self.grid, Placement::Edge, &out)
    }

    pub fn curl_dual_flat(&self, v: &[T]) -> Vec<T> {
        let w: Vec<T> = v.iter().zip(&self.face_mass).map(|(a, m)| *a * *m).collect();
        let mut out = self.curl_t.apply(&w);
        out.iter_mut().zip(&self.edge_mass).for_each(|(o, m)| *o /= *m);
        out
    }

    /// Edge field → node scalar: `−M0⁻¹ Gᵀ M1 y`, the divergence of the
    /// electric field in the node dual cells.
    pub fn div_edges(&self, y: &VectorField<T>) -> Result<ScalarField<T>> {
        expect(Placement::Edge, y.placement)?;
        y.validate(&self.grid)?;
        Ok(ScalarField { placement: Placement::Node, values: self.div_edges_flat(&y.flatten()) })
    }

    pub fn div_edges_flat(&self, y: &[T]) -> Vec<T> {
        let w: Vec<T> = y.iter().zip(&self.edge_mass).map(|(a, m)| *a * *m).collect();
        let mut out = self.grad_t.apply(&w);
        out.iter_mut().zip(&self.node_mass).for_each(|(o, m)| *o = -*o / *m);
        out
    }

    /// Hodge inner product of two fields on the same placement.
    pub fn inner(&self, u: &VectorField<T>, v: &VectorField<T>) -> Result<T> {
        expect(u.placement, v.placement)?;
        if u.placement == Placement::Node {
            let s = metric_inner(&self.grid, u, v)?;
            return Ok(crate::scalar::dot(&s.values, &self.node_mass));
        }
        Ok(crate::scalar::wdot(self.mass(u.placement), &u.flatten(), &v.flatten()))
    }

    pub fn norm(&self, u: &VectorField<T>) -> T {
        self.inner(u, u).map(|s| s.max(T::zero()).sqrt()).unwrap_or_else(|_| T::zero())
    }
}

fn lower<T: Real>(g: &[[T; 3]; 3], u: [T; 3]) -> [T; 3] {
    std::array::from_fn(|m| g[m][0] * u[0] + g[m][1] * u[1] + g[m][2] * u[2])
}

fn node_fields<T: Real>(
    grid: &MetricGrid<T>,
    u: &VectorField<T>,
    v: &VectorField<T>,
) -> Result<(VectorField<T>, VectorField<T>)> {
    u.validate(grid)?;
    v.validate(grid)?;
    if u.placement != v.placement {
        return Err(Error::Placement { expected: u.placement.name(), got: v.placement.name() });
    }
    Ok((u.to_nodes(grid), v.to_nodes(grid)))
}

/// `(u × v)^j = (det g)^{-1/2} ε^{jmn} (g u)_m (g v)_n`, evaluated at nodes.
pub fn vector_product<T: Real>(
    grid: &MetricGrid<T>,
    u: &VectorField<T>,
    v: &VectorField<T>,
) -> Result<VectorField<T>> {
    let (u, v) = node_fields(grid, u, v)?;
    let n = grid.num_nodes();
    let mut out = VectorField::zeros(grid, Placement::Node);
    for i in 0..n {
        let g = grid.metric_at(i);
        let s = T::one() / det3(g).sqrt();
        let a = lower(g, [u.comps[0][i], u.comps[1][i], u.comps[2][i]]);
        let b = lower(g, [v.comps[0][i], v.comps[1][i], v.comps[2][i]]);
        out.comps[0][i] = s * (a[1] * b[2] - a[2] * b[1]);
        out.comps[1][i] = s * (a[2] * b[0] - a[0] * b[2]);
        out.comps[2][i] = s * (a[0] * b[1] - a[1] * b[0]);
    }
    Ok(out)
}

/// Pointwise `g_jk u^j v^k` at nodes.
pub fn metric_inner<T: Real>(
    grid: &MetricGrid<T>,
    u: &VectorField<T>,
    v: &VectorField<T>,
) -> Result<ScalarField<T>> {
    let (u, v) = node_fields(grid, u, v)?;
    let values = (0..grid.num_nodes())
        .map(|i| {
            let a = lower(grid.metric_at(i), [u.comps[0][i], u.comps[1][i], u.comps[2][i]]);
            a[0] * v.comps[0][i] + a[1] * v.comps[1][i] + a[2] * v.comps[2][i]
        })
        .collect();
    Ok(ScalarField { placement: Placement::Node, values })
}

/// Multiplies an edge field by a node scalar averaged to edge midpoints.
pub fn scale_edges<T: Real>(grid: &MetricGrid<T>, phi: &ScalarField<T>, u: &VectorField<T>) -> Result<VectorField<T>> {
    expect(Placement::Node, phi.placement)?;
    expect(Placement::Edge, u.placement)?;
    let nodes = grid.node_lattice();
    let comps = std::array::from_fn(|a| {
        let lat = grid.edge_lattice(a);
        (0..lat.len())
            .map(|i| {
                let p = lat.coords(i);
                let f = (phi.values[nodes.index(p)] + phi.values[nodes.index(shift(p, a))]) * lit(0.5);
                f * u.comps[a][i]
            })
            .collect()
    });
    Ok(VectorField { placement: Placement::Edge, comps })
}
