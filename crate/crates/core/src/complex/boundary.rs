use alloc::vec::Vec;

use super::{ComplexError, ComplexSlice};
use crate::linalg::CsrMatrix;

/// Sparse matrix with entries in {-1, +1}, stored column by column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseSignMatrix {
    nrows: usize,
    ncols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    sign: Vec<i8>,
}

impl SparseSignMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            col_ptr: alloc::vec![0; ncols + 1],
            row_idx: Vec::new(),
            sign: Vec::new(),
        }
    }

    /// Builds a matrix from `(row, col, sign)` triplets. Duplicate positions
    /// and signs other than ±1 are rejected.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        mut triplets: Vec<(usize, usize, i8)>,
    ) -> Option<Self> {
        triplets.sort_unstable_by_key(|&(r, c, _)| (c, r));
        if triplets.windows(2).any(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return None;
        }
        if triplets
            .iter()
            .any(|&(r, c, s)| r >= nrows || c >= ncols || (s != 1 && s != -1))
        {
            return None;
        }
        let mut col_ptr = alloc::vec![0; ncols + 1];
        for &(_, c, _) in &triplets {
            col_ptr[c + 1] += 1;
        }
        for c in 0..ncols {
            col_ptr[c + 1] += col_ptr[c];
        }
        Some(Self {
            nrows,
            ncols,
            col_ptr,
            row_idx: triplets.iter().map(|t| t.0).collect(),
            sign: triplets.iter().map(|t| t.2).collect(),
        })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    /// `(row, sign)` entries of column `j`, rows ascending.
    pub fn column(&self, j: usize) -> impl Iterator<Item = (usize, i8)> + '_ {
        let r = self.col_ptr[j]..self.col_ptr[j + 1];
        self.row_idx[r.clone()].iter().copied().zip(self.sign[r].iter().copied())
    }

    /// `(row, col, sign)` triplets sorted by column, then row.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, i8)> + '_ {
        (0..self.ncols).flat_map(move |c| self.column(c).map(move |(r, s)| (r, c, s)))
    }

    /// `B x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = alloc::vec![0.0; self.nrows];
        for (c, &xc) in x.iter().enumerate().take(self.ncols) {
            for (r, s) in self.column(c) {
                y[r] += f64::from(s) * xc;
            }
        }
        y
    }

    /// `Bᵀ y`.
    pub fn tmul_vec(&self, y: &[f64]) -> Vec<f64> {
        (0..self.ncols)
            .map(|c| self.column(c).map(|(r, s)| f64::from(s) * y[r]).sum())
            .collect()
    }

    fn rows(&self) -> Vec<Vec<(usize, i8)>> {
        let mut rows = alloc::vec![Vec::new(); self.nrows];
        for (r, c, s) in self.triplets() {
            rows[r].push((c, s));
        }
        rows
    }

    /// `Bᵀ B` as a sparse symmetric matrix over the columns.
    pub fn gram_columns(&self) -> CsrMatrix {
        let rows = self.rows();
        let columns: Vec<Vec<(usize, i8)>> = (0..self.ncols).map(|c| self.column(c).collect()).collect();
        accumulate_products(self.ncols, &columns, &rows)
    }

    /// `B Bᵀ` as a sparse symmetric matrix over the rows.
    pub fn gram_rows(&self) -> CsrMatrix {
        let rows = self.rows();
        let columns: Vec<Vec<(usize, i8)>> = (0..self.ncols).map(|c| self.column(c).collect()).collect();
        accumulate_products(self.nrows, &rows, &columns)
    }

    /// Exact integer product `self · other`, as nonzero `(row, col, value)`
    /// entries.
    pub fn product(&self, other: &SparseSignMatrix) -> Vec<(usize, usize, i64)> {
        assert_eq!(self.ncols, other.nrows, "inner dimensions differ");
        let mut out = Vec::new();
        let mut acc = alloc::vec![0i64; self.nrows];
        let mut touched = Vec::new();
        for j in 0..other.ncols {
            for (mid, s2) in other.column(j) {
                for (r, s1) in self.column(mid) {
                    if acc[r] == 0 {
                        touched.push(r);
                    }
                    acc[r] += i64::from(s1) * i64::from(s2);
                }
            }
            touched.sort_unstable();
            touched.dedup();
            for &r in &touched {
                if acc[r] != 0 {
                    out.push((r, j, acc[r]));
                }
                acc[r] = 0;
            }
            touched.clear();
        }
        out
    }

    /// Negates the columns flagged in `flips`.
    pub fn flip_columns(&self, flips: &[bool]) -> Self {
        let mut m = self.clone();
        for c in 0..self.ncols {
            if flips.get(c).copied().unwrap_or(false) {
                for k in m.col_ptr[c]..m.col_ptr[c + 1] {
                    m.sign[k] = -m.sign[k];
                }
            }
        }
        m
    }

    /// Negates the rows flagged in `flips`.
    pub fn flip_rows(&self, flips: &[bool]) -> Self {
        let mut m = self.clone();
        for (k, &r) in self.row_idx.iter().enumerate() {
            if flips.get(r).copied().unwrap_or(false) {
                m.sign[k] = -m.sign[k];
            }
        }
        m
    }

    /// Rank over the prime field of order 2^31 - 1, by column reduction.
    ///
    /// Boundary matrices of complexes without torsion have the same rank over
    /// this field as over the rationals.
    pub fn rank_mod_p(&self) -> usize {
        const P: u64 = 2_147_483_647;
        let mut owner: Vec<Option<usize>> = alloc::vec![None; self.nrows];
        let mut reduced: Vec<Vec<(usize, u64)>> = Vec::new();
        let mut rank = 0;
        for j in 0..self.ncols {
            let mut col: Vec<(usize, u64)> = self
                .column(j)
                .map(|(r, s)| (r, if s > 0 { 1 } else { P - 1 }))
                .collect();
            while let Some(&(pivot, a)) = col.last() {
                match owner[pivot] {
                    Some(o) => {
                        let other = &reduced[o];
                        let b = other.last().expect("stored columns are nonempty").1;
                        let factor = a * pow_mod(b, P - 2, P) % P;
                        col = axpy_mod(&col, other, P - factor, P);
                    }
                    None => {
                        owner[pivot] = Some(reduced.len());
                        reduced.push(col);
                        rank += 1;
                        break;
                    }
                }
            }
        }
        rank
    }
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

// x + f * y over sorted sparse vectors, dropping zeros.
fn axpy_mod(x: &[(usize, u64)], y: &[(usize, u64)], f: u64, p: u64) -> Vec<(usize, u64)> {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        let take_x = j >= y.len() || (i < x.len() && x[i].0 < y[j].0);
        let take_y = i >= x.len() || (j < y.len() && y[j].0 < x[i].0);
        if take_x {
            out.push(x[i]);
            i += 1;
        } else if take_y {
            out.push((y[j].0, f * y[j].1 % p));
            j += 1;
        } else {
            let v = (x[i].1 + f * y[j].1) % p;
            if v != 0 {
                out.push((x[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

// For each outer item a, sums s(a, m) * s(b, m) over shared middle indices m.
fn accumulate_products(
    n: usize,
    outer: &[Vec<(usize, i8)>],
    middle: &[Vec<(usize, i8)>],
) -> CsrMatrix {
    let mut indptr = Vec::with_capacity(n + 1);
    let mut indices = Vec::new();
    let mut values = Vec::new();
    indptr.push(0);
    let mut acc = alloc::vec![0i64; n];
    let mut touched = Vec::new();
    for list in outer {
        for &(m, s1) in list {
            for &(b, s2) in &middle[m] {
                if acc[b] == 0 {
                    touched.push(b);
                }
                acc[b] += i64::from(s1) * i64::from(s2);
            }
        }
        touched.sort_unstable();
        touched.dedup();
        for &b in &touched {
            if acc[b] != 0 {
                indices.push(b);
                values.push(acc[b] as f64);
            }
            acc[b] = 0;
        }
        touched.clear();
        indptr.push(indices.len());
    }
    CsrMatrix::from_parts(n, n, indptr, indices, values)
}

/// Boundary matrix `B_k` of a slice: rows are its (k-1)-simplices, columns
/// its k-simplices, and the face without vertex `i` carries sign `(-1)^i`.
///
/// `B_0` is the empty `0 × |S_0|` matrix and `B_{K+1}` the empty
/// `|S_K| × 0` matrix, K being the complex dimension.
pub fn boundary_matrix(slice: &ComplexSlice<'_>, k: usize) -> Result<SparseSignMatrix, ComplexError> {
    let top = slice.dimension();
    if k > top + 1 {
        return Err(ComplexError::Dimension { k, max: top });
    }
    if k == 0 {
        return Ok(SparseSignMatrix::zeros(0, slice.len(0)));
    }
    if k == top + 1 {
        return Ok(SparseSignMatrix::zeros(slice.len(top), 0));
    }
    let fc = slice.parent();
    let ncols = slice.len(k);
    let mut col_ptr = Vec::with_capacity(ncols + 1);
    let mut row_idx = Vec::with_capacity(ncols * (k + 1));
    let mut sign = Vec::with_capacity(ncols * (k + 1));
    col_ptr.push(0);
    let mut entries: Vec<(usize, i8)> = Vec::with_capacity(k + 1);
    for &p in slice.members(k) {
        entries.clear();
        for (i, &face) in fc.face_indices(k, p).iter().enumerate() {
            let row = slice
                .local_index(k - 1, face)
                .expect("slices of a monotone complex are closed under faces");
            entries.push((row, if i % 2 == 0 { 1 } else { -1 }));
        }
        entries.sort_unstable_by_key(|e| e.0);
        for &(r, s) in &entries {
            row_idx.push(r);
            sign.push(s);
        }
        col_ptr.push(row_idx.len());
    }
    Ok(SparseSignMatrix {
        nrows: slice.len(k - 1),
        ncols,
        col_ptr,
        row_idx,
        sign,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{sublevel, tests::complex};
    use alloc::vec;

    fn dense(m: &SparseSignMatrix) -> Vec<Vec<i64>> {
        let mut d = vec![vec![0; m.ncols()]; m.nrows()];
        for (r, c, s) in m.triplets() {
            d[r][c] = i64::from(s);
        }
        d
    }

    #[test]
    fn hollow_triangle_incidence() {
        let fc = complex(&[(&[0, 1], 1.0), (&[0, 2], 1.0), (&[1, 2], 1.0)]);
        let b1 = boundary_matrix(&sublevel(&fc, 1.0), 1).unwrap();
        // columns [0,1], [0,2], [1,2]
        assert_eq!(dense(&b1), vec![vec![-1, -1, 0], vec![1, 0, -1], vec![0, 1, 1]]);
        assert_eq!(b1.rank_mod_p(), 2);
    }

    #[test]
    fn filled_triangle_boundary_and_identity() {
        let fc = complex(&[(&[0, 1], 1.0), (&[0, 2], 1.0), (&[1, 2], 1.0), (&[0, 1, 2], 1.0)]);
        let slice = sublevel(&fc, 1.0);
        let b1 = boundary_matrix(&slice, 1).unwrap();
        let b2 = boundary_matrix(&slice, 2).unwrap();
        assert_eq!(dense(&b2), vec![vec![1], vec![-1], vec![1]]);
        assert!(b1.product(&b2).is_empty());
        assert_eq!(b1.ncols(), b2.nrows());
        let b3 = boundary_matrix(&slice, 3).unwrap();
        assert_eq!((b3.nrows(), b3.ncols()), (1, 0));
        let b0 = boundary_matrix(&slice, 0).unwrap();
        assert_eq!((b0.nrows(), b0.ncols()), (0, 3));
        assert_eq!(
            boundary_matrix(&slice, 4),
            Err(ComplexError::Dimension { k: 4, max: 2 })
        );
    }

    #[test]
    fn grams_match_dense_products() {
        let fc = complex(&[
            (&[0, 1], 1.0),
            (&[0, 2], 1.0),
            (&[1, 2], 1.0),
            (&[1, 3], 1.0),
            (&[2, 3], 1.0),
            (&[0, 1, 2], 1.0),
        ]);
        let slice = sublevel(&fc, 1.0);
        let b = boundary_matrix(&slice, 1).unwrap();
        let d = dense(&b);
        let btb = b.gram_columns().to_dense();
        let bbt = b.gram_rows().to_dense();
        for i in 0..b.ncols() {
            for j in 0..b.ncols() {
                let want: i64 = (0..b.nrows()).map(|r| d[r][i] * d[r][j]).sum();
                assert_eq!(btb.get(i, j), want as f64);
            }
        }
        for i in 0..b.nrows() {
            for j in 0..b.nrows() {
                let want: i64 = (0..b.ncols()).map(|c| d[i][c] * d[j][c]).sum();
                assert_eq!(bbt.get(i, j), want as f64);
            }
        }
    }

    #[test]
    fn flips_negate_rows_and_columns() {
        let m = SparseSignMatrix::from_triplets(2, 2, vec![(0, 0, 1), (1, 0, -1), (1, 1, 1)]).unwrap();
        let f = m.flip_columns(&[true, false]).flip_rows(&[false, true]);
        assert_eq!(dense(&f), vec![vec![-1, 0], vec![-1, -1]]);
        assert!(SparseSignMatrix::from_triplets(1, 1, vec![(0, 0, 1), (0, 0, 1)]).is_none());
    }
}
