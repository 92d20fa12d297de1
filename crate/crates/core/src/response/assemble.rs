use nalgebra::{DMatrix, SymmetricEigen};

use super::basis::ControlBasis;
use crate::error::{Error, Result};
use crate::forward::{run_profiles, OracleFields, OracleMeta, WaveSystem};
use crate::scalar::{lit, to_f64, Real};

/// `S^T f`: `f` on `[0, T)` and `−f(2T − t)` on `[T, 2T]`, on the lattice.
pub fn odd_continuation<T: Real>(f: &[T]) -> Result<Vec<T>> {
    let n = f.len().saturating_sub(1);
    if n == 0 || n % 2 == 1 {
        return Err(Error::OddSteps { steps: n });
    }
    Ok((0..=2 * n).map(|m| if m < n { f[m] } else { -f[2 * n - m] }).collect())
}

/// Lattice adjoint of [`odd_continuation`] for the uniform quadrature.
pub fn odd_continuation_adjoint<T: Real>(g: &[T]) -> Result<Vec<T>> {
    let len = g.len().saturating_sub(1);
    if len == 0 || len % 2 == 1 {
        return Err(Error::Shape(format!("odd continuation adjoint needs 2N + 1 samples, got {}", g.len())));
    }
    let n = len / 2;
    if n % 2 == 1 {
        return Err(Error::OddSteps { steps: n });
    }
    Ok((0..=n).map(|j| if j < n { g[j] - g[2 * n - j] } else { -g[n] }).collect())
}

/// Boundary data of the template runs: `projections[p][q][m]` is the
/// response to the unit bump on profile `p` at time `(m + ½)dt`, paired with
/// profile `q`. This is everything the reconstruction reads.
#[derive(Clone, Debug, PartialEq)]
pub struct ResponseData<T> {
    pub steps_per_t: usize,
    pub projections: Vec<Vec<Vec<T>>>,
}

/// Runs one template solve per profile over `[0, 2T]`. With `oracle` set,
/// also keeps the interior snapshots `x(·, T)` of every basis control.
pub fn simulate<T: Real>(
    system: &WaveSystem<T>,
    basis: &ControlBasis<T>,
    oracle: bool,
) -> Result<(ResponseData<T>, Option<OracleFields<T>>)> {
    let n = basis.time.steps_per_t;
    let total = 2 * n;
    let snaps: Vec<usize> = if oracle { (1..=basis.num_delays()).map(|d| d * basis.width).collect() } else { Vec::new() };
    let runs = run_profiles(system, &basis.profiles, &basis.base_samples(total), total, &snaps)?;
    let oracle = oracle.then(|| {
        let mut snapshots = Vec::with_capacity(basis.len());
        let mut meta = Vec::with_capacity(basis.len());
        for (i, c) in basis.controls.iter().enumerate() {
            let mut s = runs[c.profile].snapshots[c.delay - 1].clone();
            s.iter_mut().for_each(|v| *v *= c.amplitude);
            snapshots.push(s);
            meta.push(OracleMeta { control: i, profile: c.profile, delay: c.delay });
        }
        OracleFields { physics: system.physics, snapshots, meta }
    });
    let projections = runs.into_iter().map(|r| r.projections).collect();
    Ok((ResponseData { steps_per_t: n, projections }, oracle))
}

/// `B_{kl} = (R^{2T} S^T f_k, S^T f_l)_{F^{2T}}` on the time lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct ResponseMatrix<T: Real> {
    pub entries: DMatrix<T>,
}

impl<T: Real> ResponseMatrix<T> {
    /// Assembles the matrix from template records by lattice shifts. The
    /// response at integer step `m` is the average of the neighbouring half
    /// steps, which makes the discrete energy balance exact.
    pub fn from_data(basis: &ControlBasis<T>, data: &ResponseData<T>) -> Result<Self> {
        let n = basis.time.steps_per_t;
        if data.steps_per_t != n || data.projections.len() != basis.profiles.len() {
            return Err(Error::Shape("response data does not match the control basis".into()));
        }
        for row in data.projections.iter().flatten() {
            if row.len() < 2 * n {
                return Err(Error::Shape(format!("trace has {} samples, need {}", row.len(), 2 * n)));
            }
        }
        let dt = basis.time.dt;
        let w = basis.width;
        let half = lit::<T>(0.5);
        let sf: Vec<Vec<T>> = (0..basis.len()).map(|l| odd_continuation(&basis.temporal(l))).collect::<Result<_>>()?;
        let size = basis.len();
        let mut entries = DMatrix::zeros(size, size);
        for k in 0..size {
            let ck = basis.controls[k];
            let direct = basis.start(ck.delay) as isize;
            let reflected = (n + (ck.delay - 1) * w) as isize;
            for l in 0..size {
                let cl = basis.controls[l];
                let rec = &data.projections[ck.profile][cl.profile];
                // ρ^{m+½} for control k paired with profile of l
                let rho = |m: isize| -> T {
                    let at = |s: isize| if m - s >= 0 { rec[(m - s) as usize] } else { T::zero() };
                    (at(direct) - at(reflected)) * ck.amplitude
                };
                let mut s = T::zero();
                for (m, v) in sf[l].iter().enumerate() {
                    if *v != T::zero() {
                        let m = m as isize;
                        s += *v * (rho(m - 1) + rho(m)) * half;
                    }
                }
                entries[(k, l)] = s * dt;
            }
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape("response matrix has non-finite entries".into()));
        }
        Ok(Self { entries })
    }
}

/// Runs the solver for every profile and assembles the response matrix.
pub fn assemble_response<T: Real>(system: &WaveSystem<T>, basis: &ControlBasis<T>) -> Result<ResponseMatrix<T>> {
    let (data, _) = simulate(system, basis, false)?;
    ResponseMatrix::from_data(basis, &data)
}

/// `c^T[f_k, f_l] = ½((S^T)* R^{2T} S^T f_k, f_l)`.
pub fn connecting_form<T: Real>(resp: &ResponseMatrix<T>, k: usize, l: usize) -> T {
    resp.entries[(k, l)] * lit(0.5)
}

#[derive(Clone, Debug)]
pub struct GramMatrix<T: Real> {
    pub entries: DMatrix<T>,
    /// `‖C − Cᵀ‖_F / ‖C‖_F` before symmetrization.
    pub asymmetry: f64,
    pub symmetrized: bool,
}

/// All connecting-form values, symmetrized.
pub fn gram_matrix<T: Real>(resp: &ResponseMatrix<T>) -> Result<GramMatrix<T>> {
    let c = resp.entries.map(|v| v * lit(0.5));
    let norm = to_f64(c.norm());
    let asymmetry = if norm > 0.0 { to_f64((&c - c.transpose()).norm()) / norm } else { 0.0 };
    if asymmetry > 0.2 {
        return Err(Error::Asymmetric { ratio: asymmetry });
    }
    let entries = (&c + c.transpose()) * lit::<T>(0.5);
    Ok(GramMatrix { entries, asymmetry, symmetrized: true })
}

/// `|W^T|` in orthonormal control coordinates: with `G = L Lᵀ` the control
/// Gram matrix, `matrix = (L⁻¹ C L⁻ᵀ)^{1/2}`.
#[derive(Clone, Debug)]
pub struct ModelOperator<T: Real> {
    pub matrix: DMatrix<T>,
    /// Cholesky factor of the control Gram matrix.
    pub chol: DMatrix<T>,
    pub eigenvalues: Vec<T>,
    /// Number of negative eigenvalues set to zero.
    pub clamped: usize,
    /// Negative eigenvalues below `−1e−6 λ_max`.
    pub psd_violations: usize,
}

impl<T: Real> ModelOperator<T> {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// The clamped `C` in orthonormal coordinates, `matrix²`.
    pub fn squared(&self) -> DMatrix<T> {
        &self.matrix * &self.matrix
    }
}

/// Symmetric eigendecomposition with eigenvalues sorted in descending order.
pub fn sorted_eigen<T: Real>(m: DMatrix<T>) -> (Vec<T>, DMatrix<T>) {
    let n = m.nrows();
    let e = SymmetricEigen::new(m);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| crate::scalar::cmp(&e.eigenvalues[b], &e.eigenvalues[a]));
    let vals = idx.iter().map(|&i| e.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, c| e.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky<T: Real>(g: &DMatrix<T>) -> Result<DMatrix<T>> {
    let (vals, _) = sorted_eigen(g.clone());
    if let (Some(&hi), Some(&lo)) = (vals.first(), vals.last()) {
        if !(lo > hi * lit(1e-10)) {
            return Err(Error::Eigen(format!("control Gram matrix is not positive definite (λ {lo} vs {hi})")));
        }
    }
    nalgebra::Cholesky::new(g.clone())
        .map(|c| c.l())
        .ok_or_else(|| Error::Eigen("Cholesky factorization failed".into()))
}

/// Solves `L X = B` for lower triangular `L`.
pub fn lower_solve<T: Real>(l: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    l.solve_lower_triangular(b).expect("nonsingular triangular factor")
}

/// Generalized square root of `C` in the metric of the control Gram matrix.
pub fn sqrt_operator<T: Real>(c: &GramMatrix<T>, basis_gram: &DMatrix<T>) -> Result<ModelOperator<T>> {
    let n = c.entries.nrows();
    if basis_gram.nrows() != n || c.entries.ncols() != n {
        return Err(Error::Dimension(format!("Gram {n}×{n} vs basis {}×{}", basis_gram.nrows(), basis_gram.ncols())));
    }
    let l = cholesky(basis_gram)?;
    let tmp = lower_solve(&l, &c.entries);
    let ct = lower_solve(&l, &tmp.transpose());
    let ct = (&ct + ct.transpose()) * lit::<T>(0.5);
    if ct.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("non-finite entries in the whitened Gram matrix".into()));
    }
    let (vals, vecs) = sorted_eigen(ct);
    let top = vals.first().copied().unwrap_or(T::zero()).max(T::zero());
    let clamped = vals.iter().filter(|v| **v < T::zero()).count();
    let psd_violations = vals.iter().filter(|v| **v < -top * lit(1e-6)).count();
    let roots = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, vals.iter().map(|v| v.max(T::zero()).sqrt())));
    let matrix = &vecs * roots * vecs.transpose();
    let matrix = (&matrix + matrix.transpose()) * lit::<T>(0.5);
    Ok(ModelOperator { matrix, chol: l, eigenvalues: vals, clamped, psd_violations })
}
