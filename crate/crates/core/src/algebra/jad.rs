use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

/// Result of simultaneous Jacobi diagonalization.
#[derive(Clone, Debug)]
pub struct JointDiagonalization<T: Real> {
    /// Orthogonal basis, one vector per column.
    pub basis: DMatrix<T>,
    /// Rotated members `Vᵀ A_i V`.
    pub rotated: Vec<DMatrix<T>>,
    /// Final relative off-diagonal energy.
    pub residual: f64,
    pub converged: bool,
    pub sweeps: usize,
    /// Relative off-diagonal energy after every sweep (entry 0: the input).
    pub history: Vec<f64>,
}

fn check_family<T: Real>(family: &[DMatrix<T>]) -> Result<usize> {
    let n = family.first().map_or(0, |a| a.nrows());
    for a in family {
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::Dimension(format!("family member is {}×{}, expected {n}×{n}", a.nrows(), a.ncols())));
        }
        let scale = to_f64(a.norm()).max(f64::MIN_POSITIVE);
        if to_f64((a - a.transpose()).norm()) > 1e-12 * scale {
            return Err(Error::Shape("family member is not symmetric".into()));
        }
    }
    Ok(n)
}

fn off_energy<T: Real>(family: &[DMatrix<T>]) -> (f64, f64) {
    let mut total = 0.0;
    let mut diag = 0.0;
    for a in family {
        total += to_f64(a.norm_squared());
        diag += a.diagonal().iter().map(|v| to_f64(*v * *v)).sum::<f64>();
    }
    ((total - diag).max(0.0), total)
}

/// Rotates columns `p`, `q` of a column-major `n × n` buffer by `(c, s)`.
#[inline]
fn rotate_cols<T: Real>(a: &mut [T], n: usize, p: usize, q: usize, c: T, s: T) {
    let (lo, hi) = a.split_at_mut(q * n);
    let cp = &mut lo[p * n..p * n + n];
    let cq = &mut hi[..n];
    for k in 0..n {
        let (x, y) = (cp[k], cq[k]);
        cp[k] = c * x + s * y;
        cq[k] = c * y - s * x;
    }
}

#[inline]
fn rotate_rows<T: Real>(a: &mut [T], n: usize, p: usize, q: usize, c: T, s: T) {
    for k in 0..n {
        let (x, y) = (a[k * n + p], a[k * n + q]);
        a[k * n + p] = c * x + s * y;
        a[k * n + q] = c * y - s * x;
    }
}

/// Relative decrease of the off-diagonal energy per sweep below which the
/// sweeps are considered stalled.
pub const STAGNATION: f64 = 1e-3;

/// Cardoso–Souloumiac Jacobi sweeps: for each index pair the plane rotation
/// maximizing the summed squared diagonal of all members is applied, so the
/// total off-diagonal energy never increases.
pub fn joint_diagonalize<T: Real>(family: &[DMatrix<T>], tol: f64, max_sweeps: usize) -> Result<JointDiagonalization<T>> {
    if !(tol > 0.0) {
        return Err(Error::Config("joint diagonalization tolerance must be positive".into()));
    }
    let n = check_family(family)?;
    let mut mats: Vec<DMatrix<T>> = family.to_vec();
    let mut v = DMatrix::<T>::identity(n, n);
    let (off0, total) = off_energy(&mats);
    let rel = |off: f64| if total > 0.0 { off / total } else { 0.0 };
    let mut history = vec![rel(off0)];
    let mut sweeps = 0;
    let mut converged = history[0] < tol;
    let two = lit::<T>(2.0);
    let tiny = lit::<T>(1e-14);
    while !converged && sweeps < max_sweeps {
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                // G = Σ g gᵀ with g = (A_pp − A_qq, 2 A_pq)
                let (mut gxx, mut gxy, mut gyy) = (T::zero(), T::zero(), T::zero());
                for a in &mats {
                    let d = a[(p, p)] - a[(q, q)];
                    let o = two * a[(p, q)];
                    gxx += d * d;
                    gxy += d * o;
                    gyy += o * o;
                }
                if gxy.abs() <= tiny * (gxx + gyy) || gxx + gyy == T::zero() {
                    continue;
                }
                // principal eigenvector (x, y) of [[gxx, gxy], [gxy, gyy]]
                let ton = gxx - gyy;
                let r = (ton * ton + two * two * gxy * gxy).sqrt();
                let (x, y) = if ton >= T::zero() {
                    (ton + r, two * gxy)
                } else {
                    (two * gxy, r - ton)
                };
                let (x, y) = if x < T::zero() { (-x, -y) } else { (x, y) };
                let norm = (x * x + y * y).sqrt();
                if norm == T::zero() {
                    continue;
                }
                // (cos 2θ, sin 2θ) = (x, y)/norm
                let cos2 = x / norm;
                let c = ((T::one() + cos2) / two).sqrt();
                let s = y / norm / (two * c);
                if s.abs() < lit(1e-9) {
                    continue;
                }
                rotated = true;
                for a in mats.iter_mut() {
                    let buf = a.as_mut_slice();
                    rotate_cols(buf, n, p, q, c, s);
                    rotate_rows(buf, n, p, q, c, s);
                }
                rotate_cols(v.as_mut_slice(), n, p, q, c, s);
            }
        }
        let (off, _) = off_energy(&mats);
        let r = rel(off);
        let prev = *history.last().unwrap();
        history.push(r);
        debug_assert!(r <= prev * (1.0 + 1e-9) + 1e-15, "off-diagonal energy increased: {prev} -> {r}");
        if r < tol {
            converged = true;
        } else if !rotated || prev - r <= STAGNATION * prev {
            break;
        }
    }
    let residual = *history.last().unwrap();
    Ok(JointDiagonalization { basis: v, rotated: mats, residual, converged, sweeps, history })
}

/// Recovered spectrum points: one tuple of diagonal values per basis vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumCloud {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub residual: f64,
    pub converged: bool,
    /// Coordinates moved by the clamp to `[0, T]`.
    pub clamped: usize,
}

impl SpectrumCloud {
    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, |p| p.len())
    }
}

/// Joint diagonalization followed by clamping every coordinate to `[0, T]`.
pub fn spectrum_cloud<T: Real>(family: &[DMatrix<T>], horizon: f64, tol: f64, max_sweeps: usize) -> Result<SpectrumCloud> {
    let jd = joint_diagonalize(family, tol, max_sweeps)?;
    let n = jd.basis.ncols();
    let mut clamped = 0;
    let points = (0..n)
        .map(|j| {
            jd.rotated
                .iter()
                .map(|a| {
                    let v = to_f64(a[(j, j)]);
                    let c = v.clamp(0.0, horizon);
                    clamped += usize::from(c != v);
                    c
                })
                .collect()
        })
        .collect();
    Ok(SpectrumCloud { points, weights: vec![1.0; n], residual: jd.residual, converged: jd.converged, clamped })
}
