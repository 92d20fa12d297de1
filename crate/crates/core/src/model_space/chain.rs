use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::manifold::PatchSpec;
use crate::response::ControlBasis;
use crate::scalar::{lit, Real};

/// Orthonormal bases of `U_σ^{s_j} = clos A F_σ^{T, s_j}`, `j = 0..=K`, stored
/// as one matrix whose first `ranks[j]` columns span the `j`-th space.
#[derive(Clone, Debug)]
pub struct SubspaceChain<T: Real> {
    pub patch: String,
    pub delays: Vec<T>,
    pub q: DMatrix<T>,
    /// `ranks[0] = 0` (the space for `s ≤ 0`), then one entry per delay.
    pub ranks: Vec<usize>,
    pub rank_threshold: f64,
}

impl<T: Real> SubspaceChain<T> {
    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    pub fn basis(&self, j: usize) -> DMatrix<T> {
        self.q.columns(0, self.ranks[j]).into_owned()
    }

    /// Index into `ranks` of the space for delay `s` (step function).
    pub fn level(&self, s: T) -> usize {
        self.delays.iter().take_while(|&&d| d <= s * (T::one() + lit(1e-12))).count()
    }
}

/// Orthonormal columns spanning `{Lᵀ e_i : i ∈ class}`, the class in
/// orthonormal control coordinates.
fn class_frame<T: Real>(chol: &DMatrix<T>, class: &[usize]) -> DMatrix<T> {
    let n = chol.nrows();
    let lt = chol.transpose();
    let cols = DMatrix::from_fn(n, class.len(), |r, c| lt[(r, class[c])]);
    let qr = cols.qr();
    qr.q()
}

/// Builds the chain for `patch` by applying `op` (target × controls, in
/// orthonormal control coordinates) to each delayed class. New directions at
/// each delay are taken from the part orthogonal to the previous space, so the
/// spaces nest exactly.
pub fn reachable_subspace<T: Real>(
    op: &DMatrix<T>,
    chol: &DMatrix<T>,
    basis: &ControlBasis<T>,
    patch: &PatchSpec,
    rank_threshold: f64,
) -> Result<SubspaceChain<T>> {
    if op.ncols() != basis.len() || chol.nrows() != basis.len() {
        return Err(Error::Dimension(format!("operator has {} columns, basis has {}", op.ncols(), basis.len())));
    }
    let dim = op.nrows();
    let cutoff = lit::<T>(rank_threshold) * spectral_norm(op);
    let mut q = DMatrix::<T>::zeros(dim, 0);
    let mut ranks = vec![0];
    for j in 1..=basis.num_delays() {
        let class = basis.class(patch, j);
        if class.is_empty() {
            ranks.push(q.ncols());
            continue;
        }
        let mut x = op * class_frame(chol, &class);
        if q.ncols() > 0 {
            // two passes of Gram–Schmidt against the previous space
            for _ in 0..2 {
                let c = q.transpose() * &x;
                x -= &q * c;
            }
        }
        let svd = x.svd(true, false);
        let u = svd.u.expect("left singular vectors");
        let mut keep: Vec<(T, usize)> =
            svd.singular_values.iter().enumerate().filter(|(_, s)| **s >= cutoff && **s > T::zero()).map(|(i, s)| (*s, i)).collect();
        keep.sort_by(|a, b| crate::scalar::cmp(&b.0, &a.0));
        let start = q.ncols();
        let mut grown = q.clone().resize_horizontally(start + keep.len(), T::zero());
        for (c, &(_, i)) in keep.iter().enumerate() {
            grown.set_column(start + c, &u.column(i));
        }
        q = grown;
        ranks.push(q.ncols());
    }
    Ok(SubspaceChain { patch: patch.id.clone(), delays: basis.delays.clone(), q, ranks, rank_threshold })
}

/// Largest singular value.
pub fn spectral_norm<T: Real>(m: &DMatrix<T>) -> T {
    if m.is_empty() {
        return T::zero();
    }
    m.clone().svd(false, false).singular_values.iter().fold(T::zero(), |a, b| a.max(*b))
}

#[derive(Clone, Debug)]
pub struct ProjectionOperator<T: Real> {
    pub matrix: DMatrix<T>,
    pub rank: usize,
}

/// `E^s = Q Qᵀ` for the space at delay `s` (`0` for `s ≤ 0`).
pub fn projection<T: Real>(chain: &SubspaceChain<T>, s: T) -> ProjectionOperator<T> {
    let j = if s <= T::zero() { 0 } else { chain.level(s) };
    let b = chain.basis(j);
    ProjectionOperator { matrix: &b * b.transpose(), rank: chain.ranks[j] }
}

#[derive(Clone, Debug)]
pub struct EikonalOperator<T: Real> {
    pub matrix: DMatrix<T>,
    pub patch: String,
    pub delays: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> EikonalOperator<T> {
    pub fn eigenvalues(&self) -> Vec<T> {
        crate::response::sorted_eigen(self.matrix.clone()).0
    }
}

/// `I = Σ_j Δs_j E^{s_j}`: midpoint rule for `∫_0^T E^s ds` where the space
/// reached by the bump with delay `s_j` stands for the midpoint of
/// `(s_{j−1}, s_j)`.
pub fn eikonal<T: Real>(chain: &SubspaceChain<T>) -> EikonalOperator<T> {
    let n = chain.dim();
    let mut m = DMatrix::zeros(n, n);
    let mut weights = Vec::with_capacity(chain.delays.len());
    let mut prev = T::zero();
    for (j, &s) in chain.delays.iter().enumerate() {
        let w = s - prev;
        prev = s;
        weights.push(w);
        let b = chain.basis(j + 1);
        m += (&b * b.transpose()) * w;
    }
    let m = (&m + m.transpose()) * lit::<T>(0.5);
    EikonalOperator { matrix: m, patch: chain.patch.clone(), delays: chain.delays.clone(), weights }
}
