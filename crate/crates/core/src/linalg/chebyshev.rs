use alloc::vec::Vec;

use super::{dot, norm, orthonormalize, symmetric_eigen_full, CsrMatrix, DenseMatrix, SolverError, SplitMix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChebyshevOptions {
    /// Polynomial degree of each filter application.
    pub degree: usize,
    /// Converged when `‖Av - λv‖ ≤ tol · max(1, λmax)` for every wanted pair.
    pub tol: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for ChebyshevOptions {
    fn default() -> Self {
        Self {
            degree: 20,
            tol: 1e-10,
            max_iterations: 400,
            seed: 0xC4EB,
        }
    }
}

/// The `count` smallest eigenpairs of a sparse symmetric matrix by block
/// Chebyshev-filtered subspace iteration with Rayleigh–Ritz extraction.
///
/// Returns one extra converged guard pair beyond `count` when the matrix is
/// large enough, so callers can inspect the gap after the last wanted
/// eigenvalue.
pub fn lowest_eigenpairs(
    a: &CsrMatrix,
    count: usize,
    opts: ChebyshevOptions,
) -> Result<(Vec<f64>, Vec<Vec<f64>>), SolverError> {
    let n = a.nrows();
    if count > n {
        return Err(SolverError::TooMany { requested: count, size: n });
    }
    if count == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let block = (count + core::cmp::max(8, count / 2)).min(n);
    let upper = a.gershgorin_bound() * (1.0 + 1e-12) + f64::MIN_POSITIVE;
    let scale = upper.max(1.0);
    let mut rng = SplitMix::new(opts.seed);
    let mut v: Vec<Vec<f64>> = Vec::with_capacity(block);
    refill(&mut v, block, n, &mut rng);

    let mut worst = f64::INFINITY;
    for iter in 0..opts.max_iterations {
        let (ritz, rotated, av) = rayleigh_ritz(a, &v)?;
        v = rotated;
        let wanted = (count + 1).min(v.len());
        worst = (0..wanted)
            .map(|j| {
                let r: Vec<f64> = av[j].iter().zip(&v[j]).map(|(x, y)| x - ritz[j] * y).collect();
                norm(&r)
            })
            .fold(0.0, f64::max);
        if worst <= opts.tol * scale {
            let values = ritz[..wanted].to_vec();
            v.truncate(wanted);
            log::debug!("chebyshev iteration converged after {iter} sweeps");
            return Ok((values, v));
        }
        let lo = ritz[0];
        let cut = *ritz.last().unwrap_or(&upper);
        if cut >= upper {
            // block already spans the whole spectrum
            return Err(SolverError::NoConvergence {
                stage: "chebyshev filter",
                iterations: iter,
                residual: worst,
            });
        }
        v = filter(a, &v, opts.degree, lo, cut, upper);
        orthonormalize(&[], &mut v, 1e-10);
        refill(&mut v, block, n, &mut rng);
    }
    Err(SolverError::NoConvergence {
        stage: "chebyshev filter",
        iterations: opts.max_iterations,
        residual: worst,
    })
}

fn refill(v: &mut Vec<Vec<f64>>, block: usize, n: usize, rng: &mut SplitMix) {
    while v.len() < block {
        let mut extra: Vec<Vec<f64>> = (0..block - v.len())
            .map(|_| (0..n).map(|_| rng.symmetric()).collect())
            .collect();
        orthonormalize(v, &mut extra, 1e-10);
        v.extend(extra);
    }
}

type RitzTriple = (Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>);

fn rayleigh_ritz(a: &CsrMatrix, v: &[Vec<f64>]) -> Result<RitzTriple, SolverError> {
    let b = v.len();
    let av: Vec<Vec<f64>> = v.iter().map(|x| a.mul_vec(x)).collect();
    let mut h = DenseMatrix::zeros(b, b);
    for i in 0..b {
        for j in 0..=i {
            let x = 0.5 * (dot(&v[i], &av[j]) + dot(&v[j], &av[i]));
            h.set(i, j, x);
            h.set(j, i, x);
        }
    }
    let (values, y) = symmetric_eigen_full(&h)?;
    let combine = |src: &[Vec<f64>]| -> Vec<Vec<f64>> {
        y.iter()
            .map(|coef| {
                let mut out = alloc::vec![0.0; src[0].len()];
                for (c, s) in coef.iter().zip(src) {
                    for (o, x) in out.iter_mut().zip(s) {
                        *o += c * x;
                    }
                }
                out
            })
            .collect()
    };
    Ok((values, combine(v), combine(&av)))
}

// Scaled three-term Chebyshev recurrence damping [cut, upper] and amplifying
// everything below `cut`, normalized so that the value at `lo` stays O(1).
fn filter(a: &CsrMatrix, x: &[Vec<f64>], degree: usize, lo: f64, cut: f64, upper: f64) -> Vec<Vec<f64>> {
    let e = 0.5 * (upper - cut);
    let c = 0.5 * (upper + cut);
    let sigma1 = e / (lo - c);
    let n = a.nrows();
    let mut tmp = alloc::vec![0.0; n];
    x.iter()
        .map(|x0| {
            let mut prev = x0.clone();
            a.mul_vec_into(&prev, &mut tmp);
            let mut cur: Vec<f64> = tmp.iter().zip(&prev).map(|(ax, x)| (ax - c * x) * sigma1 / e).collect();
            let mut sigma = sigma1;
            for _ in 1..degree.max(1) {
                let next_sigma = 1.0 / (2.0 / sigma1 - sigma);
                a.mul_vec_into(&cur, &mut tmp);
                let next: Vec<f64> = tmp
                    .iter()
                    .zip(&cur)
                    .zip(&prev)
                    .map(|((ay, y), x)| 2.0 * next_sigma / e * (ay - c * y) - sigma * next_sigma * x)
                    .collect();
                prev = cur;
                cur = next;
                sigma = next_sigma;
            }
            cur
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    // cycle graph Laplacian: eigenvalues 4 sin²(πj/n)
    fn cycle(n: usize) -> CsrMatrix {
        let mut indptr = vec![0];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for i in 0..n {
            let mut row = vec![((i + n - 1) % n, -1.0), (i, 2.0), ((i + 1) % n, -1.0)];
            row.sort_by_key(|p| p.0);
            for (j, v) in row {
                indices.push(j);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        CsrMatrix::from_parts(n, n, indptr, indices, values)
    }

    #[test]
    fn cycle_spectrum_bottom() {
        let n = 400;
        let a = cycle(n);
        let (values, vectors) = lowest_eigenpairs(&a, 7, ChebyshevOptions::default()).unwrap();
        let mut want: Vec<f64> = (0..n)
            .map(|j| {
                let s = libm::sin(core::f64::consts::PI * j as f64 / n as f64);
                4.0 * s * s
            })
            .collect();
        want.sort_by(f64::total_cmp);
        for (g, w) in values.iter().zip(&want).take(7) {
            assert!((g - w).abs() < 1e-9, "{g} vs {w}");
        }
        for (l, v) in values.iter().zip(&vectors).take(7) {
            let av = a.mul_vec(v);
            let r: Vec<f64> = av.iter().zip(v).map(|(x, y)| x - l * y).collect();
            assert!(norm(&r) < 1e-9);
        }
    }

    #[test]
    fn rejects_oversized_request() {
        let a = cycle(5);
        assert!(matches!(
            lowest_eigenpairs(&a, 6, ChebyshevOptions::default()),
            Err(SolverError::TooMany { .. })
        ));
    }
}
