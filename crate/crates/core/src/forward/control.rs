use std::sync::Arc;

use super::system::{Physics, WaveSystem};
use crate::error::{Error, Result};
use crate::manifold::{Rect, Side};
use crate::scalar::{from_usize, lit, to_f64, Real};

/// Uniform time lattice with `steps_per_t` steps on `[0, T]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid<T> {
    pub horizon: T,
    pub steps_per_t: usize,
    pub dt: T,
}

impl<T: Real> TimeGrid<T> {
    /// Smallest step count that is a multiple of `multiple` and gives
    /// `dt ≤ dt_max`.
    pub fn fit(horizon: T, dt_max: T, multiple: usize) -> Result<Self> {
        if !(horizon > T::zero()) || !(dt_max > T::zero()) || multiple == 0 {
            return Err(Error::Config("time grid needs positive horizon, dt and multiple".into()));
        }
        let raw = to_f64(horizon / dt_max).ceil().max(1.0) as usize;
        let steps = raw.div_ceil(multiple) * multiple;
        Self::new(horizon, steps)
    }

    pub fn new(horizon: T, steps_per_t: usize) -> Result<Self> {
        if steps_per_t == 0 || steps_per_t % 2 == 1 {
            return Err(Error::OddSteps { steps: steps_per_t });
        }
        Ok(Self { horizon, steps_per_t, dt: horizon / from_usize(steps_per_t) })
    }

    pub fn time(&self, step: usize) -> T {
        self.dt * from_usize(step)
    }
}

/// Samples of the bump `(1 − u²)^power`, `u ∈ [−1, 1]`, at `width + 1`
/// equispaced points; exactly symmetric and zero at both ends.
pub fn bump_table<T: Real>(width: usize, power: i32) -> Vec<T> {
    let mut v = vec![T::zero(); width + 1];
    for j in 1..width {
        let u: T = lit::<T>(2.0) * from_usize(j) / from_usize(width) - T::one();
        v[j] = (T::one() - u * u).powi(power);
    }
    for j in 0..=width / 2 {
        v[width - j] = v[j];
    }
    v
}

fn smooth_window(u: f64) -> f64 {
    let s = 2.0 * u - 1.0;
    let w = 1.0 - s * s;
    if w <= 0.0 {
        0.0
    } else {
        w * w
    }
}

/// Fixed spatial pattern on boundary dofs: `(boundary position, value)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpatialProfile<T> {
    pub label: String,
    pub rect: Rect,
    pub entries: Vec<(usize, T)>,
}

impl<T: Real> SpatialProfile<T> {
    /// Product bump over `rect`, normalized to unit surface norm.
    ///
    /// For Maxwell the profile lives on boundary edges of the side plane that
    /// point along tangent axis `rect.side.tangents()[polarization]`; for the
    /// scalar wave on the boundary nodes of the side plane.
    pub fn bump(system: &WaveSystem<T>, rect: Rect, polarization: usize, label: impl Into<String>) -> Result<Self> {
        let grid = system.grid();
        let side: Side = rect.side;
        let layer = side.layer(grid);
        let nodes = grid.node_lattice();
        let mut entries = Vec::new();
        for (k, &dof) in system.boundary.iter().enumerate() {
            let x = match system.physics {
                Physics::Maxwell => {
                    let (a, p) = grid.edge_coords(dof);
                    if p[side.axis] != layer || a != side.tangents()[polarization % 2] {
                        continue;
                    }
                    grid.edge_midpoint(a, p)
                }
                Physics::Scalar => {
                    let p = nodes.coords(dof);
                    if p[side.axis] != layer {
                        continue;
                    }
                    grid.node_position(p)
                }
            };
            if let Some(u) = rect.local(grid, x) {
                let w = smooth_window(u[0]) * smooth_window(u[1]);
                if w > 0.0 {
                    entries.push((k, lit::<T>(w)));
                }
            }
        }
        if entries.is_empty() {
            return Err(Error::EmptyPatch);
        }
        let norm = entries.iter().fold(T::zero(), |s, &(k, v)| s + system.area[k] * v * v).sqrt();
        entries.iter_mut().for_each(|e| e.1 /= norm);
        Ok(Self { label: label.into(), rect, entries })
    }

    /// Surface inner product `Σ a_B φ_B ψ_B` with another profile.
    pub fn inner(&self, other: &Self, area: &[T]) -> T {
        let mut s = T::zero();
        let (mut i, mut j) = (0, 0);
        while i < self.entries.len() && j < other.entries.len() {
            let (a, b) = (self.entries[i], other.entries[j]);
            match a.0.cmp(&b.0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    s += area[a.0] * a.1 * b.1;
                    i += 1;
                    j += 1;
                }
            }
        }
        s
    }

    /// `Σ_B φ_B v_B` for a vector indexed by boundary position.
    pub fn pair(&self, v: &[T]) -> T {
        self.entries.iter().fold(T::zero(), |s, &(k, w)| s + w * v[k])
    }
}

/// Boundary control `f(γ, t) = temporal(t) · profile(γ)` sampled on the time lattice.
#[derive(Clone, Debug)]
pub struct ControlSignal<T> {
    pub patch: String,
    pub profile: Arc<SpatialProfile<T>>,
    /// Samples at `t_m = m·dt`; later times are zero.
    pub temporal: Vec<T>,
    /// Delay `s`: the control is supported in `(T − s, T]`.
    pub delay: Option<T>,
}

impl<T: Real> ControlSignal<T> {
    pub fn value(&self, step: usize) -> T {
        self.temporal.get(step).copied().unwrap_or(T::zero())
    }

    pub fn boundary_values(&self, step: usize, out: &mut [T]) {
        out.iter_mut().for_each(|v| *v = T::zero());
        let a = self.value(step);
        if a != T::zero() {
            for &(k, w) in &self.profile.entries {
                out[k] = a * w;
            }
        }
    }

    pub fn with_temporal(&self, temporal: Vec<T>) -> Self {
        Self { temporal, ..self.clone() }
    }

    pub fn scaled(&self, s: T) -> Self {
        self.with_temporal(self.temporal.iter().map(|v| *v * s).collect())
    }

    pub fn validate(&self, system: &WaveSystem<T>, time: &TimeGrid<T>) -> Result<()> {
        if self.temporal.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config(format!("control on {} has non-finite samples", self.patch)));
        }
        if self.temporal.first().is_some_and(|v| *v != T::zero()) {
            return Err(Error::Config(format!("control on {} does not vanish at t = 0", self.patch)));
        }
        if self.profile.entries.iter().any(|&(k, _)| k >= system.boundary.len()) {
            return Err(Error::Shape("control profile refers to a non-boundary dof".into()));
        }
        if let Some(s) = self.delay {
            let quiet = time.horizon - s;
            for (m, v) in self.temporal.iter().enumerate().take(time.steps_per_t + 1) {
                if time.time(m) <= quiet && *v != T::zero() {
                    return Err(Error::Config(format!(
                        "control on {} with delay {s} is active at t = {}",
                        self.patch,
                        time.time(m)
                    )));
                }
            }
        }
        Ok(())
    }
}
