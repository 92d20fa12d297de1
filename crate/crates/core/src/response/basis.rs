use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{bump_table, ControlSignal, SpatialProfile, TimeGrid, WaveSystem};
use crate::manifold::{PatchSpec, Rect, Side};
use crate::scalar::{from_usize, Real};

/// Shape of the control family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BasisSpec {
    /// Supports of the spatial profiles.
    pub rects: Vec<Rect>,
    /// Tangential polarizations per rectangle (1 or 2; ignored for the scalar wave).
    pub polarizations: usize,
    /// Number of delays `K`.
    pub delays: usize,
    /// Exponent `p` of the temporal bump `(1 − u²)^p`.
    pub bump_power: i32,
    /// Amplitude multiplier applied to every control.
    pub amplitude: f64,
}

impl Default for BasisSpec {
    fn default() -> Self {
        Self { rects: Self::tiles(2), polarizations: 1, delays: 8, bump_power: 3, amplitude: 1.0 }
    }
}

impl BasisSpec {
    /// `m × m` tiles on every side.
    pub fn tiles(m: usize) -> Vec<Rect> {
        let mut rects = Vec::with_capacity(6 * m * m);
        for s in Side::all() {
            for j in 0..m {
                for i in 0..m {
                    rects.push(Rect::tile(s, m, i, j));
                }
            }
        }
        rects
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasisControl<T> {
    pub profile: usize,
    /// Delay index `k ∈ 1..=K`; the control lives in `(T − s_k, T − s_{k−1})`.
    pub delay: usize,
    pub amplitude: T,
}

/// Controls `f_{p,k} = β(t − (T − s_k)) φ_p` for every profile `p` and delay
/// `s_k = kT/K`, together with their Gram matrix in `L₂(Γ × [0, T])`.
#[derive(Clone, Debug)]
pub struct ControlBasis<T: Real> {
    pub time: TimeGrid<T>,
    pub delays: Vec<T>,
    /// Bump width in steps, `N / K`.
    pub width: usize,
    pub bump: Vec<T>,
    pub profiles: Vec<Arc<SpatialProfile<T>>>,
    pub controls: Vec<BasisControl<T>>,
    pub profile_gram: DMatrix<T>,
    pub gram: DMatrix<T>,
}

impl<T: Real> ControlBasis<T> {
    pub fn new(system: &WaveSystem<T>, time: TimeGrid<T>, spec: &BasisSpec) -> Result<Self> {
        let k = spec.delays;
        if k == 0 || time.steps_per_t % k != 0 {
            return Err(Error::Config(format!("{} steps per T is not a multiple of K = {k}", time.steps_per_t)));
        }
        if time.steps_per_t % 2 != 0 {
            return Err(Error::OddSteps { steps: time.steps_per_t });
        }
        if !(1..=2).contains(&spec.polarizations) {
            return Err(Error::Config("polarizations must be 1 or 2".into()));
        }
        if spec.bump_power < 3 {
            return Err(Error::Config("bump power below 3 is not C²".into()));
        }
        let width = time.steps_per_t / k;
        let pols = match system.physics {
            crate::forward::Physics::Maxwell => spec.polarizations,
            crate::forward::Physics::Scalar => 1,
        };
        let mut profiles = Vec::new();
        for (r, rect) in spec.rects.iter().enumerate() {
            for pol in 0..pols {
                let label = format!("r{r}.p{pol}");
                profiles.push(Arc::new(SpatialProfile::bump(system, *rect, pol, label)?));
            }
        }
        let amp = crate::scalar::lit::<T>(spec.amplitude);
        let mut controls = Vec::with_capacity(profiles.len() * k);
        for p in 0..profiles.len() {
            for d in 1..=k {
                controls.push(BasisControl { profile: p, delay: d, amplitude: amp });
            }
        }
        Self::from_parts(system, time, width, bump_table(width, spec.bump_power), profiles, controls)
    }

    pub fn from_parts(
        system: &WaveSystem<T>,
        time: TimeGrid<T>,
        width: usize,
        bump: Vec<T>,
        profiles: Vec<Arc<SpatialProfile<T>>>,
        controls: Vec<BasisControl<T>>,
    ) -> Result<Self> {
        let k = time.steps_per_t / width;
        let delays = (1..=k).map(|j| time.dt * from_usize(j * width)).collect();
        let np = profiles.len();
        let profile_gram = DMatrix::from_fn(np, np, |i, j| profiles[i].inner(&profiles[j], &system.area));
        let mut basis = Self {
            time,
            delays,
            width,
            bump,
            profiles,
            controls,
            profile_gram,
            gram: DMatrix::zeros(0, 0),
        };
        let n = basis.len();
        let temporal: Vec<Vec<T>> = (1..=k).map(|d| basis.delay_samples(d)).collect();
        let tg = DMatrix::from_fn(k, k, |a, b| {
            crate::scalar::dot(&temporal[a], &temporal[b]) * basis.time.dt
        });
        basis.gram = DMatrix::from_fn(n, n, |i, j| {
            let (ci, cj) = (basis.controls[i], basis.controls[j]);
            ci.amplitude * cj.amplitude * basis.profile_gram[(ci.profile, cj.profile)] * tg[(ci.delay - 1, cj.delay - 1)]
        });
        Ok(basis)
    }

    pub fn len(&self) -> usize {
        self.controls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.controls.is_empty()
    }

    pub fn num_delays(&self) -> usize {
        self.delays.len()
    }

    /// First step of the bump with delay index `d`.
    pub fn start(&self, d: usize) -> usize {
        self.time.steps_per_t - d * self.width
    }

    /// Unit-amplitude temporal samples on `[0, T]` for delay index `d`.
    pub fn delay_samples(&self, d: usize) -> Vec<T> {
        let mut v = vec![T::zero(); self.time.steps_per_t + 1];
        let s = self.start(d);
        v[s..=s + self.width].copy_from_slice(&self.bump);
        v
    }

    /// Temporal samples of control `i` on `[0, T]`.
    pub fn temporal(&self, i: usize) -> Vec<T> {
        let c = self.controls[i];
        self.delay_samples(c.delay).into_iter().map(|v| v * c.amplitude).collect()
    }

    pub fn signal(&self, i: usize) -> ControlSignal<T> {
        let c = self.controls[i];
        ControlSignal {
            patch: self.profiles[c.profile].label.clone(),
            profile: self.profiles[c.profile].clone(),
            temporal: self.temporal(i),
            delay: Some(self.delays[c.delay - 1]),
        }
    }

    /// Bump starting at step zero, the template every control is a shift of.
    pub fn base_samples(&self, total_steps: usize) -> Vec<T> {
        let mut v = vec![T::zero(); total_steps + 1];
        v[..=self.width].copy_from_slice(&self.bump);
        v
    }

    /// Profiles whose support lies inside the patch.
    pub fn profile_members(&self, patch: &PatchSpec) -> Vec<usize> {
        let tol = 1e-9;
        (0..self.profiles.len())
            .filter(|&p| {
                let r = self.profiles[p].rect;
                patch.rects.iter().any(|q| {
                    q.side == r.side && (0..2).all(|k| q.lo[k] <= r.lo[k] + tol && r.hi[k] <= q.hi[k] + tol)
                })
            })
            .collect()
    }

    /// Controls in the delayed class `F_{σ}^{T, s_j}`: supported on the patch
    /// with delay index at most `j` (`j = 0` gives the empty class).
    pub fn class(&self, patch: &PatchSpec, j: usize) -> Vec<usize> {
        let members = self.profile_members(patch);
        (0..self.len())
            .filter(|&i| members.contains(&self.controls[i].profile) && self.controls[i].delay <= j)
            .collect()
    }
}
