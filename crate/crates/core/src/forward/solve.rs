use std::sync::Arc;

use rayon::prelude::*;

use super::control::{ControlSignal, SpatialProfile};
use super::system::{Physics, WaveState, WaveSystem};
use crate::error::{Error, Result};
use crate::scalar::Real;

const FINITE_CHECK_EVERY: usize = 8;

/// What to keep from a run besides the final state.
#[derive(Clone, Debug, Default)]
pub struct Recording {
    /// Keep `r^{m+½} = flux / area` on every boundary dof for every step.
    pub trace: bool,
    /// Steps at which to copy the primary field.
    pub snapshots: Vec<usize>,
    /// Control index reported in instability errors.
    pub control_index: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct Solution<T> {
    pub state: WaveState<T>,
    /// `trace[m][k]`: response at time `(m + ½)dt` on boundary dof `k`.
    pub trace: Vec<Vec<T>>,
    pub snapshots: Vec<(usize, Vec<T>)>,
}

/// Runs the system from zero data for `steps` steps under `control`.
pub fn solve<T: Real>(
    system: &WaveSystem<T>,
    control: &ControlSignal<T>,
    steps: usize,
    rec: &Recording,
) -> Result<Solution<T>> {
    run(system, steps, rec, |m, out| control.boundary_values(m, out))
}

/// Scalar-wave run with Dirichlet control.
pub fn solve_wave<T: Real>(
    system: &WaveSystem<T>,
    control: &ControlSignal<T>,
    steps: usize,
    rec: &Recording,
) -> Result<Solution<T>> {
    if system.physics != Physics::Scalar {
        return Err(Error::Config("solve_wave needs a scalar-wave system".into()));
    }
    solve(system, control, steps, rec)
}

/// Boundary record `r^{m+½}`, `m = 0..steps`, for one control.
pub fn response_trace<T: Real>(system: &WaveSystem<T>, control: &ControlSignal<T>, steps: usize) -> Result<Vec<Vec<T>>> {
    let rec = Recording { trace: true, ..Default::default() };
    Ok(solve(system, control, steps, &rec)?.trace)
}

/// Generic driver; `boundary(m, out)` fills the boundary values at step `m`.
pub fn run<T: Real>(
    system: &WaveSystem<T>,
    steps: usize,
    rec: &Recording,
    mut boundary: impl FnMut(usize, &mut [T]),
) -> Result<Solution<T>> {
    let mut state = system.zero_state();
    let mut b = vec![T::zero(); system.boundary.len()];
    boundary(0, &mut b);
    for (k, &dof) in system.boundary.iter().enumerate() {
        state.x[dof] = b[k];
    }
    let mut trace = Vec::with_capacity(if rec.trace { steps } else { 0 });
    let mut snapshots = Vec::with_capacity(rec.snapshots.len());
    if rec.snapshots.contains(&0) {
        snapshots.push((0, state.x.clone()));
    }
    for m in 0..steps {
        boundary(m + 1, &mut b);
        system.step(&mut state, &b);
        if (m + 1) % FINITE_CHECK_EVERY == 0 || m + 1 == steps {
            if !state.is_finite() {
                return Err(Error::Instability { step: m + 1, control: rec.control_index });
            }
        }
        if rec.trace {
            trace.push(state.flux.iter().zip(&system.area).map(|(f, a)| *f / *a).collect());
        }
        if rec.snapshots.contains(&(m + 1)) {
            snapshots.push((m + 1, state.x.clone()));
        }
    }
    Ok(Solution { state, trace, snapshots })
}

/// Output of a run driven by one spatial profile.
#[derive(Clone, Debug)]
pub struct ProfileRun<T> {
    /// `projections[q][m] = Σ_B φ_q(B) ρ_B^{m+½}`: the response paired with
    /// every profile `q` in the surface inner product.
    pub projections: Vec<Vec<T>>,
    pub snapshots: Vec<Vec<T>>,
}

/// Drives one run per profile with temporal samples `base` and projects the
/// responses onto all profiles. Runs are independent and execute in parallel.
///
/// The scheme is time invariant, so responses to delayed or reflected copies
/// of `base` are exact lattice shifts of these records.
pub fn run_profiles<T: Real>(
    system: &WaveSystem<T>,
    profiles: &[Arc<SpatialProfile<T>>],
    base: &[T],
    steps: usize,
    snapshot_steps: &[usize],
) -> Result<Vec<ProfileRun<T>>> {
    profiles
        .par_iter()
        .enumerate()
        .map(|(p, prof)| {
            let mut projections = vec![Vec::with_capacity(steps); profiles.len()];
            let mut snapshots = Vec::with_capacity(snapshot_steps.len());
            let mut state = system.zero_state();
            let mut b = vec![T::zero(); system.boundary.len()];
            for m in 0..steps {
                let a = base.get(m + 1).copied().unwrap_or(T::zero());
                b.iter_mut().for_each(|v| *v = T::zero());
                for &(k, w) in &prof.entries {
                    b[k] = a * w;
                }
                system.step(&mut state, &b);
                if ((m + 1) % FINITE_CHECK_EVERY == 0 || m + 1 == steps) && !state.is_finite() {
                    return Err(Error::Instability { step: m + 1, control: Some(p) });
                }
                for (q, other) in profiles.iter().enumerate() {
                    projections[q].push(other.pair(&state.flux));
                }
                if snapshot_steps.contains(&(m + 1)) {
                    snapshots.push(state.x.clone());
                }
            }
            Ok(ProfileRun { projections, snapshots })
        })
        .collect()
}
