//! Small dense/sparse linear algebra kit used by the spectral pipeline.
//!
//! Symmetric eigenproblems go through Householder tridiagonalization and
//! implicit QL ([`Tridiagonal`]); large sparse operators use a block
//! Chebyshev-filtered subspace iteration ([`lowest_eigenpairs`]). Least
//! squares projections use conjugate gradients ([`conjugate_gradient`]).

mod cg;
mod chebyshev;
mod tridiagonal;

use alloc::vec::Vec;

use thiserror::Error;

pub use cg::conjugate_gradient;
pub use chebyshev::{lowest_eigenpairs, ChebyshevOptions};
pub use tridiagonal::{symmetric_eigen_full, Tridiagonal};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("{stage} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        stage: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("requested {requested} eigenpairs from a {size}x{size} matrix")]
    TooMany { requested: usize, size: usize },
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            data: alloc::vec![0.0; nrows * ncols],
        }
    }

    pub fn from_row_major(nrows: usize, ncols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), nrows * ncols);
        Self { nrows, ncols, data }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.ncols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.ncols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.nrows).map(|i| dot(self.row(i), x)).collect()
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn from_parts(
        nrows: usize,
        ncols: usize,
        indptr: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        assert_eq!(indptr.len(), nrows + 1);
        assert_eq!(indices.len(), values.len());
        Self {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_parts(n, n, alloc::vec![0; n + 1], Vec::new(), Vec::new())
    }

    /// Builds a matrix from dense rows, dropping zeros.
    pub fn from_dense(m: &DenseMatrix) -> Self {
        let mut indptr = alloc::vec![0];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for i in 0..m.nrows() {
            for (j, &v) in m.row(i).iter().enumerate() {
                if v != 0.0 {
                    indices.push(j);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self::from_parts(m.nrows(), m.ncols(), indptr, indices, values)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.indptr[i]..self.indptr[i + 1];
        match self.indices[r.clone()].binary_search(&j) {
            Ok(pos) => self.values[r.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.nrows) {
            let r = self.indptr[i]..self.indptr[i + 1];
            *yi = self.indices[r.clone()]
                .iter()
                .zip(&self.values[r])
                .map(|(&j, &v)| v * x[j])
                .sum();
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = alloc::vec![0.0; self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                m.set(i, j, v);
            }
        }
        m
    }

    /// Entrywise sum of two matrices of equal shape.
    pub fn add(&self, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut indptr = alloc::vec![0];
        let mut indices = Vec::with_capacity(self.nnz() + other.nnz());
        let mut values = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.nrows {
            let mut a = self.row(i).peekable();
            let mut b = other.row(i).peekable();
            loop {
                let (j, v) = match (a.peek(), b.peek()) {
                    (None, None) => break,
                    (Some(&x), None) => {
                        a.next();
                        x
                    }
                    (None, Some(&y)) => {
                        b.next();
                        y
                    }
                    (Some(&x), Some(&y)) => {
                        if x.0 < y.0 {
                            a.next();
                            x
                        } else if y.0 < x.0 {
                            b.next();
                            y
                        } else {
                            a.next();
                            b.next();
                            (x.0, x.1 + y.1)
                        }
                    }
                };
                if v != 0.0 {
                    indices.push(j);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix::from_parts(self.nrows, self.ncols, indptr, indices, values)
    }

    /// Symmetric conjugation `D A D` with `D = diag(±1)`, negating where
    /// `flips` is set.
    pub fn conjugate_signs(&self, flips: &[bool]) -> CsrMatrix {
        let s = |i: usize| if flips.get(i).copied().unwrap_or(false) { -1.0 } else { 1.0 };
        let mut m = self.clone();
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                m.values[k] *= s(i) * s(self.indices[k]);
            }
        }
        m
    }

    /// Gershgorin upper bound on the spectral radius.
    /// Index sets of the connected components of the nonzero pattern (a
    /// symmetric matrix is block diagonal over them), each ascending, ordered
    /// by smallest index.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.nrows;
        let mut parent: Vec<usize> = (0..n).collect();
        fn root(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for i in 0..n {
            for (j, v) in self.row(i) {
                if v != 0.0 && j != i {
                    let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut slot = alloc::vec![usize::MAX; n];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            let r = root(&mut parent, i);
            if slot[r] == usize::MAX {
                slot[r] = out.len();
                out.push(Vec::new());
            }
            out[slot[r]].push(i);
        }
        out
    }

    /// Dense principal submatrix on the ascending index set `idx`.
    pub fn principal_dense(&self, idx: &[usize]) -> DenseMatrix {
        let k = idx.len();
        let mut d = DenseMatrix::zeros(k, k);
        for (li, &i) in idx.iter().enumerate() {
            for (j, v) in self.row(i) {
                if let Ok(lj) = idx.binary_search(&j) {
                    d.set(li, lj, v);
                }
            }
        }
        d
    }

    pub fn gershgorin_bound(&self) -> f64 {
        (0..self.nrows)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub(crate) fn scale(v: &mut [f64], s: f64) {
    for x in v {
        *x *= s;
    }
}

/// Orthonormalizes `vectors` in place by two passes of modified Gram-Schmidt
/// against `basis` and each other. Vectors whose norm collapses below
/// `drop_tol` times their input norm are removed; returns how many survive.
pub fn orthonormalize(basis: &[Vec<f64>], vectors: &mut Vec<Vec<f64>>, drop_tol: f64) -> usize {
    let mut kept: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for mut v in vectors.drain(..) {
        let before = norm(&v);
        if before == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for b in basis.iter().chain(kept.iter()) {
                let c = dot(b, &v);
                axpy(-c, b, &mut v);
            }
        }
        let after = norm(&v);
        if after > drop_tol * before {
            scale(&mut v, 1.0 / after);
            kept.push(v);
        }
    }
    *vectors = kept;
    vectors.len()
}

/// SplitMix64: a tiny deterministic source of start vectors.
#[derive(Debug, Clone)]
pub(crate) struct SplitMix(u64);

impl SplitMix {
    pub(crate) fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub(crate) fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [-1, 1).
    pub(crate) fn symmetric(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn csr_add_and_conjugate() {
        let a = CsrMatrix::from_dense(&DenseMatrix::from_row_major(2, 2, vec![1.0, -1.0, -1.0, 1.0]));
        let b = CsrMatrix::from_dense(&DenseMatrix::from_row_major(2, 2, vec![0.0, 1.0, 1.0, 2.0]));
        let c = a.add(&b);
        assert_eq!(c.nnz(), 2);
        assert_eq!(c.get(1, 1), 3.0);
        assert_eq!(c.get(0, 1), 0.0);
        let d = a.conjugate_signs(&[true, false]);
        assert_eq!(d.get(0, 1), 1.0);
        assert_eq!(d.get(0, 0), 1.0);
        assert_eq!(a.gershgorin_bound(), 2.0);
    }

    #[test]
    fn gram_schmidt_drops_dependent_vectors() {
        let mut v = vec![vec![1.0, 1.0, 0.0], vec![2.0, 2.0, 0.0], vec![0.0, 1.0, 0.0]];
        assert_eq!(orthonormalize(&[], &mut v, 1e-8), 2);
        assert!(dot(&v[0], &v[1]).abs() < 1e-15);
        assert!((norm(&v[1]) - 1.0).abs() < 1e-15);
    }
}
