use nalgebra::DMatrix;

use super::chain::{eikonal, reachable_subspace, EikonalOperator};
use crate::error::{Error, Result};
use crate::forward::{OracleFields, Physics};
use crate::manifold::{nodes_to_edges, MetricGrid, PatchSpec, ScalarField};
use crate::response::{lower_solve, sorted_eigen, ControlBasis};
use crate::scalar::{lit, Real};

/// Span of the solver snapshots with an orthonormal frame in the energy
/// inner product.
#[derive(Clone, Debug)]
pub struct OracleSpace<T: Real> {
    pub physics: Physics,
    /// Orthonormal fields, one per column (primary dofs × rank).
    pub psi: DMatrix<T>,
    /// `W` in frame coordinates: rank × controls, acting on orthonormal
    /// control coordinates.
    pub w: DMatrix<T>,
    /// Primary-dof mass.
    pub mass: Vec<T>,
    /// `C_oracle = Sᵀ M S` in control coordinates.
    pub gram: DMatrix<T>,
    pub singular_values: Vec<T>,
}

impl<T: Real> OracleSpace<T> {
    pub fn new(oracle: &OracleFields<T>, mass: &[T], chol: &DMatrix<T>, rank_threshold: f64) -> Result<Self> {
        let n = oracle.snapshots.len();
        let len = mass.len();
        if chol.nrows() != n || oracle.snapshots.iter().any(|s| s.len() != len) {
            return Err(Error::Dimension("oracle snapshots do not match the basis".into()));
        }
        let s = DMatrix::from_fn(len, n, |r, c| oracle.snapshots[c][r]);
        let ms = DMatrix::from_fn(len, n, |r, c| s[(r, c)] * mass[r]);
        let gram = s.transpose() * &ms;
        let gram = (&gram + gram.transpose()) * lit::<T>(0.5);
        // whitened Gram L⁻¹ C L⁻ᵀ
        let tmp = lower_solve(chol, &gram);
        let white = lower_solve(chol, &tmp.transpose());
        let white = (&white + white.transpose()) * lit::<T>(0.5);
        let (vals, vecs) = sorted_eigen(white);
        let top = vals.first().copied().unwrap_or(T::zero());
        let eps = lit::<T>(rank_threshold);
        let rank = vals.iter().take_while(|v| **v > T::zero() && v.sqrt() >= eps * top.sqrt()).count();
        if rank < 3 {
            return Err(Error::RankCollapse { rank });
        }
        let v = vecs.columns(0, rank).into_owned();
        let sv: Vec<T> = vals[..rank].iter().map(|x| x.sqrt()).collect();
        // Ψ = S L⁻ᵀ V Λ^{-1/2}
        let lt_inv_v = chol.transpose().solve_upper_triangular(&v).expect("nonsingular factor");
        let mut coeff = lt_inv_v;
        for (c, s) in sv.iter().enumerate() {
            coeff.column_mut(c).scale_mut(T::one() / *s);
        }
        let psi = &s * coeff;
        let mut w = v.transpose();
        for (r, s) in sv.iter().enumerate() {
            w.row_mut(r).scale_mut(*s);
        }
        Ok(Self { physics: oracle.physics, psi, w, mass: mass.to_vec(), gram, singular_values: sv })
    }

    pub fn rank(&self) -> usize {
        self.psi.ncols()
    }

    /// Coordinates of a primary field in the frame (`Ψᵀ M y`).
    pub fn coords(&self, field: &[T]) -> nalgebra::DVector<T> {
        let my = nalgebra::DVector::from_iterator(field.len(), field.iter().zip(&self.mass).map(|(a, b)| *a * *b));
        self.psi.transpose() * my
    }

    pub fn field(&self, coords: &nalgebra::DVector<T>) -> Vec<T> {
        (&self.psi * coords).iter().copied().collect()
    }
}

/// Eikonal of `patch` built from snapshots, in the oracle frame.
pub fn oracle_eikonal<T: Real>(
    space: &OracleSpace<T>,
    chol: &DMatrix<T>,
    basis: &ControlBasis<T>,
    patch: &PatchSpec,
    rank_threshold: f64,
) -> Result<(EikonalOperator<T>, super::SubspaceChain<T>)> {
    let chain = reachable_subspace(&space.w, chol, basis, patch, rank_threshold)?;
    Ok((eikonal(&chain), chain))
}

/// Node function sampled at primary dofs (edge midpoints or nodes).
pub fn primary_values<T: Real>(grid: &MetricGrid<T>, physics: Physics, f: &ScalarField<T>) -> Vec<T> {
    match physics {
        Physics::Maxwell => nodes_to_edges(grid, &f.values),
        Physics::Scalar => f.values.clone(),
    }
}

/// `E^T[f] y = E^T(f y)` in the oracle frame: `Ψᵀ M diag(f) Ψ`.
pub fn mult_project<T: Real>(space: &OracleSpace<T>, f_primary: &[T]) -> Result<DMatrix<T>> {
    if f_primary.len() != space.mass.len() {
        return Err(Error::Dimension(format!("function has {} samples, fields have {}", f_primary.len(), space.mass.len())));
    }
    let len = f_primary.len();
    let r = space.rank();
    let weighted = DMatrix::from_fn(len, r, |i, c| space.psi[(i, c)] * space.mass[i] * f_primary[i]);
    let m = space.psi.transpose() * weighted;
    Ok((&m + m.transpose()) * lit::<T>(0.5))
}
