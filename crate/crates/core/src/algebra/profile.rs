use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model_space::spectral_norm;
use crate::scalar::{lit, to_f64, Real};

#[derive(Clone, Debug)]
pub struct CommutatorProfile {
    /// `‖[A_i, A_j]‖ / (‖A_i‖ ‖A_j‖)` in the spectral norm.
    pub normalized: DMatrix<f64>,
    /// Singular values (descending) of `[A_i, A_j]` for `i < j`, if requested.
    pub singular_values: Vec<((usize, usize), Vec<f64>)>,
}

impl CommutatorProfile {
    pub fn max_normalized(&self) -> f64 {
        self.normalized.iter().fold(0.0, |m, v| m.max(*v))
    }

    /// Mean over pairs `i < j`.
    pub fn mean_normalized(&self) -> f64 {
        let m = self.normalized.nrows();
        if m < 2 {
            return 0.0;
        }
        let mut s = 0.0;
        for i in 0..m {
            for j in i + 1..m {
                s += self.normalized[(i, j)];
            }
        }
        s / (m * (m - 1) / 2) as f64
    }
}

pub fn commutator<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    a * b - b * a
}

pub fn commutator_profile<T: Real>(family: &[DMatrix<T>], singular: bool) -> CommutatorProfile {
    let m = family.len();
    let norms: Vec<f64> = family.iter().map(|a| to_f64(spectral_norm(a))).collect();
    let mut normalized = DMatrix::zeros(m, m);
    let mut sv = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let c = commutator(&family[i], &family[j]);
            let s = c.clone().svd(false, false).singular_values;
            let mut list: Vec<f64> = s.iter().map(|v| to_f64(*v)).collect();
            list.sort_by(|a, b| b.total_cmp(a));
            let top = list.first().copied().unwrap_or(0.0);
            let denom = norms[i] * norms[j];
            let v = if denom > 0.0 { top / denom } else { 0.0 };
            normalized[(i, j)] = v;
            normalized[(j, i)] = v;
            if singular {
                sv.push(((i, j), list));
            }
        }
    }
    CommutatorProfile { normalized, singular_values: sv }
}

/// Identity, the members and all symmetrized products of up to `degree`
/// factors, with near-duplicates removed.
pub fn algebra_closure<T: Real>(family: &[DMatrix<T>], degree: usize) -> Result<Vec<DMatrix<T>>> {
    const LIMIT: usize = 10_000;
    if degree == 0 {
        return Err(Error::Config("closure degree must be at least 1".into()));
    }
    let m = family.len();
    let words: usize = (1..=degree).map(|d| m.saturating_pow(d as u32)).fold(0usize, |a, b| a.saturating_add(b));
    if words + 1 > LIMIT {
        return Err(Error::Blowup { limit: LIMIT });
    }
    let n = family.first().map_or(0, |a| a.nrows());
    let mut out: Vec<DMatrix<T>> = vec![DMatrix::identity(n, n)];
    let scale = family.iter().map(|a| to_f64(a.norm())).fold(1.0, f64::max);
    let push = |out: &mut Vec<DMatrix<T>>, x: DMatrix<T>| {
        let x = (&x + x.transpose()) * lit::<T>(0.5);
        let tol = 1e-10 * scale.max(to_f64(x.norm()));
        if !out.iter().any(|y| to_f64((y - &x).norm()) <= tol) {
            out.push(x);
        }
    };
    let mut layer: Vec<DMatrix<T>> = family.to_vec();
    for a in family {
        push(&mut out, a.clone());
    }
    for _ in 1..degree {
        let mut next = Vec::with_capacity(layer.len() * m);
        for w in &layer {
            for a in family {
                next.push(w * a);
            }
        }
        for x in &next {
            push(&mut out, x.clone());
        }
        layer = next;
    }
    Ok(out)
}
