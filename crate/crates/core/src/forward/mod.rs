//! Leapfrog simulation of the boundary-controlled Maxwell system and of the
//! scalar wave equation, with response recording and interior snapshots.

mod control;
mod solve;
mod system;

pub use control::{bump_table, ControlSignal, SpatialProfile, TimeGrid};
pub use solve::{response_trace, run, run_profiles, solve, solve_wave, ProfileRun, Recording, Solution};
pub use system::{cfl_limit, MaxwellState, Physics, WaveState, WaveSystem};

/// Interior snapshots `x(·, T)` of the basis controls: the verification side
/// of the pipeline, never read by the reconstruction.
#[derive(Clone, Debug)]
pub struct OracleFields<T> {
    pub physics: Physics,
    /// One primary field per basis control, in basis order.
    pub snapshots: Vec<Vec<T>>,
    /// Basis control index, profile index and delay index of every snapshot.
    pub meta: Vec<OracleMeta>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleMeta {
    pub control: usize,
    pub profile: usize,
    pub delay: usize,
}
