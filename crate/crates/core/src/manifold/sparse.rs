use crate::scalar::Real;

/// Compressed sparse row matrix, just enough for the fixed difference stencils.
#[derive(Clone, Debug)]
pub struct Csr<T> {
    pub nrows: usize,
    pub ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<T>,
}

impl<T: Real> Csr<T> {
    /// Builds from per-row `(column, value)` lists; zero values are dropped.
    pub fn from_rows(ncols: usize, rows: Vec<Vec<(usize, T)>>) -> Self {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        indptr.push(0);
        for row in &rows {
            for &(j, v) in row {
                debug_assert!(j < ncols);
                if v != T::zero() {
                    indices.push(j);
                    data.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self { nrows: rows.len(), ncols, indptr, indices, data }
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.data[r].iter().copied())
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.nrows];
        self.apply_into(x, &mut y);
        y
    }

    pub fn apply_into(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = T::zero();
            for k in self.indptr[i]..self.indptr[i + 1] {
                s += self.data[k] * x[self.indices[k]];
            }
            *yi = s;
        }
    }

    pub fn transpose(&self) -> Self {
        let mut count = vec![0usize; self.ncols + 1];
        for &j in &self.indices {
            count[j + 1] += 1;
        }
        for j in 0..self.ncols {
            count[j + 1] += count[j];
        }
        let indptr = count.clone();
        let mut next = count;
        let mut indices = vec![0; self.nnz()];
        let mut data = vec![T::zero(); self.nnz()];
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                let j = self.indices[k];
                indices[next[j]] = i;
                data[next[j]] = self.data[k];
                next[j] += 1;
            }
        }
        Self { nrows: self.ncols, ncols: self.nrows, indptr, indices, data }
    }

    /// `diag(left) · self · diag(right)`.
    pub fn scaled(&self, left: &[T], right: &[T]) -> Self {
        let mut out = self.clone();
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                out.data[k] = left[i] * self.data[k] * right[self.indices[k]];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transpose_matches_dense() {
        let m = Csr::from_rows(3, vec![vec![(0, 1.0), (2, 2.0)], vec![], vec![(1, -3.0), (2, 0.0)]]);
        let t = m.transpose();
        assert_eq!(t.nnz(), 3);
        let x = [1.0, 2.0, 3.0];
        // x · (M e_j) == (Mᵀ x)_j
        let mt_x = t.apply(&x);
        for j in 0..3 {
            let mut e = [0.0; 3];
            e[j] = 1.0;
            let col = m.apply(&e);
            let want: f64 = col.iter().zip(&x).map(|(a, b)| a * b).sum();
            assert_eq!(mt_x[j], want);
        }
    }
}
