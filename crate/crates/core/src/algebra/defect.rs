use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::forward::Physics;
use crate::manifold::{geodesic_distance, nodes_to_edges, truncate, BoundaryPatch, Calculus, PatchSpec};
use crate::model_space::{mult_project, oracle_eikonal, primary_values, OracleSpace};
use crate::response::ControlBasis;
use crate::scalar::{lit, to_f64, Real};

#[derive(Clone, Debug)]
pub struct DefectReport {
    pub patch: String,
    /// Singular values of `I^T[σ] − E^T[τ̃^T[σ]]`, descending.
    pub singular_values: Vec<f64>,
    /// First (1-based) index with `s_k / s_1 ≤ 0.1`.
    pub k0: Option<usize>,
    /// Worst `‖(τ̃ − I)y − K y‖ / ‖y‖` over the sample fields.
    pub identity_error: f64,
    /// Quadrature tolerance `Δs / 2` for that check.
    pub identity_tolerance: f64,
    /// Worst `‖curl(K y)‖ / ‖y‖` (`grad` for the scalar wave).
    pub curl_ratio: f64,
}

/// Compares the oracle eikonal of `patch` with the compressed multiplication
/// by `τ̃^T[σ]`, and checks the quadrature identity
/// `(τ̃ − I) y = Σ_k Δs (X^{m_k} − E^{s_k}) y` on random oracle fields, with
/// `m_k` the midpoint of `(s_{k−1}, s_k)`.
#[allow(clippy::too_many_arguments)]
pub fn compact_defect<T: Real>(
    space: &OracleSpace<T>,
    calc: &Calculus<T>,
    chol: &DMatrix<T>,
    basis: &ControlBasis<T>,
    patch: &PatchSpec,
    rank_threshold: f64,
    samples: usize,
    seed: u64,
) -> Result<DefectReport> {
    let grid = calc.grid();
    let horizon = basis.time.horizon;
    let bp = BoundaryPatch::new(grid, patch)?;
    let tau = geodesic_distance(grid, &bp)?;
    let eik_fn = truncate(&tau, horizon);
    let (eik, chain) = oracle_eikonal(space, chol, basis, patch, rank_threshold)?;
    let mult = mult_project(space, &primary_values(grid, space.physics, &eik_fn))?;
    let d = &eik.matrix - mult;
    let mut sv: Vec<f64> = d.svd(false, false).singular_values.iter().map(|v| to_f64(*v)).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let k0 = sv.first().filter(|s| **s > 0.0).and_then(|&s1| sv.iter().position(|&s| s / s1 <= 0.1).map(|i| i + 1));

    let tau_p = match space.physics {
        Physics::Maxwell => nodes_to_edges(grid, &tau.values),
        Physics::Scalar => tau.values.clone(),
    };
    let tilde: Vec<T> = tau_p.iter().map(|&t| (horizon - t).max(T::zero())).collect();
    let mids: Vec<T> = {
        let mut prev = T::zero();
        basis.delays.iter().map(|&s| {
            let m = (prev + s) * lit(0.5);
            prev = s;
            m
        }).collect()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = space.rank();
    let norm = |v: &[T]| crate::scalar::wdot(&space.mass, v, v).sqrt();
    let (mut worst, mut curl_ratio) = (0.0f64, 0.0f64);
    let mut max_ds = T::zero();
    for _ in 0..samples {
        let c = DVector::from_fn(r, |_, _| lit::<T>(rng.random_range(-1.0..1.0)));
        let y = space.field(&c);
        let ny = norm(&y);
        // (τ̃ − I) y
        let iy = space.field(&(&eik.matrix * &c));
        let lhs: Vec<T> = y.iter().zip(&tilde).zip(&iy).map(|((y, t), i)| *t * *y - *i).collect();
        // Σ Δs (X − E) y
        let mut ky = vec![T::zero(); y.len()];
        let mut prev = T::zero();
        for (k, &s) in basis.delays.iter().enumerate() {
            let ds = s - prev;
            prev = s;
            max_ds = max_ds.max(ds);
            let q = chain.basis(k + 1);
            let ey = space.field(&(&q * (q.transpose() * &c)));
            for i in 0..y.len() {
                let x = if tau_p[i] < mids[k] { y[i] } else { T::zero() };
                ky[i] += ds * (x - ey[i]);
            }
        }
        let diff: Vec<T> = lhs.iter().zip(&ky).map(|(a, b)| *a - *b).collect();
        worst = worst.max(to_f64(norm(&diff) / ny));
        let dk = match space.physics {
            Physics::Maxwell => calc.curl.apply(&ky),
            Physics::Scalar => calc.grad.apply(&ky),
        };
        let sec = match space.physics {
            Physics::Maxwell => &calc.face_mass,
            Physics::Scalar => &calc.edge_mass,
        };
        curl_ratio = curl_ratio.max(to_f64(crate::scalar::wdot(sec, &dk, &dk).sqrt() / ny));
    }
    Ok(DefectReport {
        patch: patch.id.clone(),
        singular_values: sv,
        k0,
        identity_error: worst,
        identity_tolerance: to_f64(max_ds) * 0.5,
        curl_ratio,
    })
}
