use alloc::vec::Vec;

use super::{HodgeOperators, SpectralError, Tolerances};
use crate::linalg::{dot, lowest_eigenpairs, norm, ChebyshevOptions, CsrMatrix, SolverError, SplitMix, Tridiagonal};

/// Operators up to this many rows are solved densely.
pub const DENSE_LIMIT: usize = 3000;

// Below this size, or when more than a third of the spectrum is wanted,
// QL with accumulated vectors beats inverse iteration.
const FULL_QL_LIMIT: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenCount {
    Smallest(usize),
    All,
}

impl EigenCount {
    pub(crate) fn clamp(self, n: usize) -> Self {
        match self {
            EigenCount::Smallest(m) if m < n => self,
            _ => EigenCount::All,
        }
    }

    fn resolve(self, n: usize) -> usize {
        match self {
            EigenCount::Smallest(m) => m,
            EigenCount::All => n,
        }
    }
}

/// Untyped eigenpairs, ascending.
///
/// `values` may extend past `requested` so that no eigenspace is cut in two;
/// [`super::classify`] types the complete spaces and then truncates.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub lambda_max: f64,
    pub requested: usize,
}

/// Smallest eigenpairs of `L_k` with orthonormal eigenvectors.
pub fn eigendecompose(ops: &HodgeOperators, count: EigenCount, tol: &Tolerances) -> Result<Eigensystem, SpectralError> {
    let n = ops.size();
    let m = count.resolve(n);
    if m > n {
        return Err(SolverError::TooMany { requested: m, size: n }.into());
    }
    if n == 0 || m == 0 {
        return Ok(Eigensystem {
            values: Vec::new(),
            vectors: Vec::new(),
            lambda_max: 0.0,
            requested: m,
        });
    }
    let system = if n <= DENSE_LIMIT || m == n {
        dense(ops.laplacian(), m, tol)?
    } else {
        sparse(ops.laplacian(), m, tol)?
    };
    verify(ops.laplacian(), &system, tol)?;
    Ok(system)
}

// First index past `m` that does not split a cluster of eigenvalues.
fn cluster_end(values: &[f64], m: usize, delta: f64) -> usize {
    let mut end = m.min(values.len());
    while end > 0 && end < values.len() && values[end] - values[end - 1] <= delta {
        end += 1;
    }
    end
}

// Disconnected pieces of the complex make L block diagonal; each block is
// reduced on its own, which costs Σ n_i³ instead of n³.
fn dense(a: &CsrMatrix, m: usize, tol: &Tolerances) -> Result<Eigensystem, SpectralError> {
    let n = a.nrows();
    let blocks = a.components();
    if blocks.len() == 1 {
        return dense_block(&a.to_dense(), m, tol);
    }
    let tris: Vec<Tridiagonal> = blocks.iter().map(|b| Tridiagonal::new(&a.principal_dense(b))).collect();
    let mut merged: Vec<(f64, usize)> = Vec::with_capacity(n);
    for (bi, tri) in tris.iter().enumerate() {
        merged.extend(tri.eigenvalues()?.into_iter().map(|l| (l, bi)));
    }
    // equal values keep block order, so the result is deterministic
    merged.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let all: Vec<f64> = merged.iter().map(|x| x.0).collect();
    let lambda_max = all.last().copied().unwrap_or(0.0).max(0.0);
    let end = cluster_end(&all, m, tol.scaled(lambda_max).degeneracy);

    let mut wanted = alloc::vec![0usize; blocks.len()];
    for &(_, bi) in &merged[..end] {
        wanted[bi] += 1;
    }
    let mut per_block: Vec<alloc::vec::IntoIter<Vec<f64>>> = Vec::with_capacity(blocks.len());
    for ((block, tri), &count) in blocks.iter().zip(&tris).zip(&wanted) {
        let local = if count == 0 {
            Vec::new()
        } else {
            let sub = a.principal_dense(block);
            let sys = solve_tridiagonal(tri, &CsrMatrix::from_dense(&sub), count, tol)?;
            sys.1
        };
        let full: Vec<Vec<f64>> = local
            .into_iter()
            .map(|v| {
                let mut x = alloc::vec![0.0; n];
                for (&i, vi) in block.iter().zip(v) {
                    x[i] = vi;
                }
                x
            })
            .collect();
        per_block.push(full.into_iter());
    }
    let vectors = merged[..end]
        .iter()
        .map(|&(_, bi)| per_block[bi].next().expect("one vector per selected value"))
        .collect();
    Ok(Eigensystem {
        values: all[..end].to_vec(),
        vectors,
        lambda_max,
        requested: m,
    })
}

fn dense_block(a: &crate::linalg::DenseMatrix, m: usize, tol: &Tolerances) -> Result<Eigensystem, SpectralError> {
    let tri = Tridiagonal::new(a);
    let all = tri.eigenvalues()?;
    let lambda_max = all.last().copied().unwrap_or(0.0).max(0.0);
    let end = cluster_end(&all, m, tol.scaled(lambda_max).degeneracy);
    let (values, vectors) = solve_tridiagonal(&tri, &CsrMatrix::from_dense(a), end, tol)?;
    Ok(Eigensystem {
        values,
        vectors,
        lambda_max,
        requested: m,
    })
}

// The `count` smallest eigenpairs of the matrix `a` reduced to `tri`: inverse
// iteration when few are wanted from a large matrix, QL with accumulated
// vectors otherwise or when inverse iteration falls short.
fn solve_tridiagonal(
    tri: &Tridiagonal,
    a: &CsrMatrix,
    count: usize,
    tol: &Tolerances,
) -> Result<(Vec<f64>, Vec<Vec<f64>>), SpectralError> {
    let n = tri.len();
    let all = tri.eigenvalues()?;
    if n > FULL_QL_LIMIT && 3 * count <= n {
        let system = Eigensystem {
            values: all[..count].to_vec(),
            vectors: tri.eigenvectors(&all[..count]),
            lambda_max: all.last().copied().unwrap_or(0.0).max(0.0),
            requested: count,
        };
        if verify(a, &system, tol).is_ok() && orthonormal(&system.vectors, 1e-10) {
            return Ok((system.values, system.vectors));
        }
        log::debug!("inverse iteration fell short on a {n}x{n} operator, using full QL");
    }
    let (mut values, mut vectors) = tri.full()?;
    values.truncate(count);
    vectors.truncate(count);
    Ok((values, vectors))
}

fn sparse(a: &CsrMatrix, m: usize, tol: &Tolerances) -> Result<Eigensystem, SpectralError> {
    let n = a.nrows();
    let lambda_max = power_iteration(a, 300);
    let scaled = tol.scaled(lambda_max);
    let opts = ChebyshevOptions {
        tol: 0.05 * tol.eigen_residual * lambda_max.max(1.0) / a.gershgorin_bound().max(1.0),
        ..ChebyshevOptions::default()
    };
    let mut want = m;
    loop {
        let (mut values, mut vectors) = lowest_eigenpairs(a, want, opts)?;
        let end = cluster_end(&values, m, scaled.degeneracy);
        if end < values.len() || values.len() == n {
            values.truncate(end);
            vectors.truncate(end);
            return Ok(Eigensystem {
                values,
                vectors,
                lambda_max,
                requested: m,
            });
        }
        want = (end + 8).min(n);
    }
}

// Largest eigenvalue of a positive semidefinite matrix, from below.
fn power_iteration(a: &CsrMatrix, steps: usize) -> f64 {
    let n = a.nrows();
    let mut rng = SplitMix::new(0x9017);
    let mut v: Vec<f64> = (0..n).map(|_| rng.symmetric()).collect();
    let mut w = alloc::vec![0.0; n];
    let mut estimate = 0.0;
    for _ in 0..steps {
        let nv = norm(&v);
        if nv == 0.0 {
            break;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        a.mul_vec_into(&v, &mut w);
        estimate = dot(&v, &w);
        core::mem::swap(&mut v, &mut w);
    }
    estimate
}

fn verify(a: &CsrMatrix, system: &Eigensystem, tol: &Tolerances) -> Result<(), SolverError> {
    let bound = tol.eigen_residual * system.lambda_max.max(1.0);
    let mut av = alloc::vec![0.0; a.nrows()];
    for (l, v) in system.values.iter().zip(&system.vectors) {
        a.mul_vec_into(v, &mut av);
        let r = libm::sqrt(av.iter().zip(v).map(|(x, y)| (x - l * y) * (x - l * y)).sum::<f64>());
        if r > bound || !r.is_finite() {
            return Err(SolverError::NoConvergence {
                stage: "eigenpair residual check",
                iterations: 0,
                residual: r,
            });
        }
    }
    Ok(())
}

fn orthonormal(vectors: &[Vec<f64>], tol: f64) -> bool {
    vectors.iter().enumerate().all(|(i, a)| {
        vectors[..=i].iter().enumerate().all(|(j, b)| {
            let want = if i == j { 1.0 } else { 0.0 };
            (dot(a, b) - want).abs() <= tol
        })
    })
}
