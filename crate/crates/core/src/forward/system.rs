use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{Calculus, Csr, MetricGrid, Placement};
use crate::scalar::{lit, to_f64, Real};

/// Which wave system is simulated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Physics {
    /// `e_t = curl h`, `h_t = −curl e`, tangential `e` prescribed on the boundary.
    Maxwell,
    /// `u_tt = Δ_g u` with Dirichlet data.
    Scalar,
}

impl Physics {
    pub fn primary(self) -> Placement {
        match self {
            Physics::Maxwell => Placement::Edge,
            Physics::Scalar => Placement::Node,
        }
    }

    pub fn secondary(self) -> Placement {
        match self {
            Physics::Maxwell => Placement::Face,
            Physics::Scalar => Placement::Edge,
        }
    }
}

/// Leapfrog discretization shared by both physics.
///
/// With primary unknown `x` (electric field on edges, or the scalar on nodes)
/// and secondary `y` (magnetic field on faces, or the gradient flux on edges):
///
/// ```text
/// y^{n+½} = y^{n−½} − dt D x^n
/// x^{n+1} = x^n + dt M₁⁻¹ Dᵀ M₂ y^{n+½}      (interior dofs)
/// x^{n+1} = b^{n+1}                           (boundary dofs)
/// ```
///
/// `D` is the curl for Maxwell and `−grad` for the scalar wave.
#[derive(Clone, Debug)]
pub struct WaveSystem<T: Real> {
    pub physics: Physics,
    calc: Calculus<T>,
    d: Csr<T>,
    dual: Csr<T>,
    /// Boundary dofs (tangential boundary edges or boundary nodes), sorted.
    pub boundary: Vec<usize>,
    boundary_pos: Vec<Option<usize>>,
    /// Surface weight of each boundary dof, so `Σ a_B f_B g_B ≈ ∫_Γ ⟨f, g⟩ dΓ`.
    pub area: Vec<T>,
    pub dt: T,
}

/// Time step bound `cfl · h_min / √(3 λ_max(g⁻¹))`.
pub fn cfl_limit<T: Real>(grid: &MetricGrid<T>, cfl: T) -> T {
    cfl * grid.min_spacing() / (lit::<T>(3.0) * grid.max_inverse_metric_eigenvalue()).sqrt()
}

fn maxwell_area<T: Real>(grid: &MetricGrid<T>, e: usize) -> T {
    let (a, p) = grid.edge_coords(e);
    let nodes = grid.node_lattice();
    let h = grid.spacing();
    let gmid = |i: usize, j: usize| {
        let (m0, m1) = (grid.metric_at(nodes.index(p)), grid.metric_at(nodes.index(crate::manifold::shift(p, a))));
        (m0[i][j] + m1[i][j]) * lit(0.5)
    };
    let gaa = gmid(a, a);
    let mut s = T::zero();
    for n in (0..3).filter(|&n| n != a && grid.on_boundary(n, p[n])) {
        let c = 3 - a - n;
        let frac = if grid.on_boundary(c, p[c]) { lit(0.5) } else { T::one() };
        s += (gaa * gmid(c, c)).sqrt() * h[a] * h[c] * frac;
    }
    gaa * s
}

fn scalar_area<T: Real>(grid: &MetricGrid<T>, n: usize) -> T {
    let nodes = grid.node_lattice();
    let p = nodes.coords(n);
    let g = grid.metric_at(n);
    let h = grid.spacing();
    let mut s = T::zero();
    for ax in (0..3).filter(|&ax| grid.on_boundary(ax, p[ax])) {
        let (b, c) = ((ax + 1) % 3, (ax + 2) % 3);
        let mut w = (g[b][b] * g[c][c]).sqrt() * h[b] * h[c];
        for t in [b, c] {
            if grid.on_boundary(t, p[t]) {
                w *= lit(0.5);
            }
        }
        s += w;
    }
    s
}

impl<T: Real> WaveSystem<T> {
    /// Builds the system; `dt` must respect [`cfl_limit`] with factor one.
    pub fn new(grid: &MetricGrid<T>, physics: Physics, dt: T) -> Result<Self> {
        let limit = cfl_limit(grid, T::one());
        if !(dt > T::zero()) || dt > limit {
            return Err(Error::Cfl { dt: to_f64(dt), limit: to_f64(limit) });
        }
        let calc = Calculus::new(grid);
        let (d, m1, m2) = match physics {
            Physics::Maxwell => (calc.curl.clone(), calc.edge_mass.clone(), calc.face_mass.clone()),
            Physics::Scalar => {
                let ones = vec![-T::one(); calc.grad.nrows];
                let unit = vec![T::one(); calc.grad.ncols];
                (calc.grad.scaled(&ones, &unit), calc.node_mass.clone(), calc.edge_mass.clone())
            }
        };
        let inv_m1: Vec<T> = m1.iter().map(|m| T::one() / *m).collect();
        let dual = d.transpose().scaled(&inv_m1, &m2);
        let boundary: Vec<usize> = match physics {
            Physics::Maxwell => (0..grid.num_edges())
                .filter(|&e| {
                    let (a, p) = grid.edge_coords(e);
                    grid.is_boundary_edge(a, p)
                })
                .collect(),
            Physics::Scalar => {
                let nodes = grid.node_lattice();
                (0..nodes.len()).filter(|&n| grid.is_boundary_node(nodes.coords(n))).collect()
            }
        };
        let mut boundary_pos = vec![None; d.ncols];
        for (k, &b) in boundary.iter().enumerate() {
            boundary_pos[b] = Some(k);
        }
        let area = boundary
            .iter()
            .map(|&b| match physics {
                Physics::Maxwell => maxwell_area(grid, b),
                Physics::Scalar => scalar_area(grid, b),
            })
            .collect();
        Ok(Self { physics, calc, d, dual, boundary, boundary_pos, area, dt })
    }

    pub fn grid(&self) -> &MetricGrid<T> {
        self.calc.grid()
    }

    pub fn calculus(&self) -> &Calculus<T> {
        &self.calc
    }

    pub fn primary_len(&self) -> usize {
        self.d.ncols
    }

    pub fn secondary_len(&self) -> usize {
        self.d.nrows
    }

    pub fn primary_mass(&self) -> &[T] {
        self.calc.mass(self.physics.primary())
    }

    pub fn secondary_mass(&self) -> &[T] {
        self.calc.mass(self.physics.secondary())
    }

    /// Position of a primary dof in [`Self::boundary`], if it is a boundary dof.
    pub fn boundary_position(&self, dof: usize) -> Option<usize> {
        self.boundary_pos[dof]
    }

    pub fn zero_state(&self) -> WaveState<T> {
        WaveState {
            x: vec![T::zero(); self.primary_len()],
            y: vec![T::zero(); self.secondary_len()],
            flux: vec![T::zero(); self.boundary.len()],
            step: 0,
            dt: self.dt,
        }
    }

    /// One leapfrog step. `next_boundary` holds the boundary values at the new
    /// time level, aligned with [`Self::boundary`].
    pub fn step(&self, state: &mut WaveState<T>, next_boundary: &[T]) {
        assert_eq!(next_boundary.len(), self.boundary.len());
        let dt = self.dt;
        let dx = self.d.apply(&state.x);
        state.y.iter_mut().zip(&dx).for_each(|(y, v)| *y -= dt * *v);
        let z = self.dual.apply(&state.y);
        for (i, x) in state.x.iter_mut().enumerate() {
            if self.boundary_pos[i].is_none() {
                *x += dt * z[i];
            }
        }
        let m1 = self.primary_mass();
        for (k, &b) in self.boundary.iter().enumerate() {
            state.x[b] = next_boundary[k];
            state.flux[k] = -m1[b] * z[b];
        }
        state.step += 1;
    }

    /// Discrete energy `½‖x‖²_{M₁} + ½(y^{n−½}, y^{n+½})_{M₂}`, conserved
    /// exactly by the closed scheme.
    pub fn energy(&self, state: &WaveState<T>) -> T {
        let dx = self.d.apply(&state.x);
        let m2 = self.secondary_mass();
        let mut ey = T::zero();
        for i in 0..state.y.len() {
            ey += m2[i] * state.y[i] * (state.y[i] - self.dt * dx[i]);
        }
        (crate::scalar::wdot(self.primary_mass(), &state.x, &state.x) + ey) * lit(0.5)
    }

    /// `D x`: the curl of an edge field, or minus the gradient of a node field.
    pub fn apply_d(&self, x: &[T]) -> Vec<T> {
        self.d.apply(x)
    }
}

/// Leapfrog state: primary field at integer time `step·dt`, secondary field at
/// the preceding half step, and the boundary flux `−(Dᵀ M₂ y)_B` of the last
/// step (a response sample at the half step).
#[derive(Clone, Debug)]
pub struct WaveState<T> {
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub flux: Vec<T>,
    pub step: usize,
    pub dt: T,
}

impl<T: Real> WaveState<T> {
    pub fn time(&self) -> T {
        self.dt * crate::scalar::from_usize(self.step)
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(&self.y).all(|v| v.is_finite())
    }

    pub fn scale(&mut self, s: T) {
        self.x.iter_mut().chain(self.y.iter_mut()).chain(self.flux.iter_mut()).for_each(|v| *v *= s);
    }
}

/// Electric field on edges and magnetic field on faces.
pub type MaxwellState<T> = WaveState<T>;
