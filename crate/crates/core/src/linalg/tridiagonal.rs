use alloc::vec::Vec;

use super::{dot, norm, DenseMatrix, SolverError, SplitMix};

const EPS: f64 = f64::EPSILON;
const QL_MAX_SWEEPS: usize = 60;

/// Householder reduction `A = Q T Qᵀ` of a symmetric matrix, keeping the
/// reflectors so that eigenvectors of `T` can be mapped back.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    diag: Vec<f64>,
    // off[i] couples rows i and i + 1; off[n - 1] = 0
    off: Vec<f64>,
    reflectors: Vec<(Vec<f64>, f64)>,
}

impl Tridiagonal {
    /// Reduces the symmetric matrix `a`. Only the lower triangle is read.
    pub fn new(a: &DenseMatrix) -> Self {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "matrix must be square");
        // row-major; only entries (i, j) with j <= i are kept up to date
        let mut m = a.as_slice().to_vec();
        let mut off = alloc::vec![0.0; n];
        let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
        let steps = n.saturating_sub(2);
        // A22 v of the current step, computed during the previous sweep
        let mut next = if steps > 0 { reflector(&m, n, 0) } else { None };
        let mut av = alloc::vec![0.0; n];
        if let Some((v, _, _)) = &next {
            lower_matvec(&m, n, 1, v, &mut av[..n - 1]);
        }
        for k in 0..steps {
            let size = n - k - 1;
            let Some((v, beta, alpha)) = next.take() else {
                off[k] = m[(k + 1) * n + k];
                reflectors.push((Vec::new(), 0.0));
                if k + 1 < steps {
                    next = reflector(&m, n, k + 1);
                    if let Some((v, _, _)) = &next {
                        lower_matvec(&m, n, k + 2, v, &mut av[..size - 1]);
                    }
                }
                continue;
            };
            // w = beta A22 v - (beta/2)(pᵀv) v
            let mut w: Vec<f64> = av[..size].iter().map(|x| beta * x).collect();
            let kappa = 0.5 * beta * dot(&w, &v);
            for (wi, vi) in w.iter_mut().zip(&v) {
                *wi -= kappa * vi;
            }
            // first column of the trailing block, so the next reflector is
            // known before the sweep
            for i in 0..size {
                m[(k + 1 + i) * n + k + 1] -= v[i] * w[0] + w[i] * v[0];
            }
            next = if k + 1 < steps { reflector(&m, n, k + 1) } else { None };
            let nv = next.as_ref().map(|(v, _, _)| v.as_slice());
            let av_next = &mut av[..size - 1];
            av_next.iter_mut().for_each(|x| *x = 0.0);
            // rank-2 update of the rest, fused with the next A22 v
            for i in 1..size {
                let (vi, wi) = (v[i], w[i]);
                let base = (k + 1 + i) * n + k + 1;
                let row = &mut m[base + 1..=base + i];
                for ((r, &vj), &wj) in row.iter_mut().zip(&v[1..=i]).zip(&w[1..=i]) {
                    *r -= vi * wj + wi * vj;
                }
                if let Some(u) = nv {
                    let ui = u[i - 1];
                    let mut acc = 0.0;
                    for ((&a, &uj), pj) in row[..i - 1].iter().zip(&u[..i - 1]).zip(av_next[..i - 1].iter_mut()) {
                        acc += a * uj;
                        *pj += a * ui;
                    }
                    av_next[i - 1] += acc + row[i - 1] * ui;
                }
            }
            off[k] = alpha;
            reflectors.push((v, beta));
        }
        if n >= 2 {
            off[n - 2] = m[(n - 1) * n + n - 2];
        }
        let diag = (0..n).map(|i| m[i * n + i]).collect();
        Self {
            diag,
            off,
            reflectors,
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    fn norm_estimate(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
                self.diag[i].abs() + left + self.off[i].abs()
            })
            .fold(0.0, f64::max)
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>, SolverError> {
        let mut d = self.diag.clone();
        let mut e = self.off.clone();
        implicit_ql(&mut d, &mut e, None)?;
        d.sort_by(f64::total_cmp);
        Ok(d)
    }

    /// Eigenvectors of the original matrix for the given (ascending)
    /// eigenvalues of `T`, by inverse iteration on `T` followed by the
    /// Householder back-transformation. Vectors of eigenvalues closer than
    /// `1e-3 ‖T‖` are orthogonalized against each other.
    pub fn eigenvectors(&self, values: &[f64]) -> Vec<Vec<f64>> {
        let n = self.len();
        let tnorm = self.norm_estimate().max(f64::MIN_POSITIVE);
        let ortol = 1e-3 * tnorm;
        let pertol = 10.0 * EPS * tnorm;
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(values.len());
        let mut cluster_start = 0;
        let mut prev_shift = f64::NEG_INFINITY;
        for (j, &lambda) in values.iter().enumerate() {
            if j == 0 || lambda - values[j - 1] >= ortol {
                cluster_start = j;
            }
            let mut shift = lambda;
            if j > cluster_start && shift - prev_shift < pertol {
                shift = prev_shift + pertol;
            }
            prev_shift = shift;
            let lu = TridiagonalLu::factor(&self.diag, &self.off, shift, pertol);
            let mut rng = SplitMix::new(0x5EED_0000 + j as u64);
            let mut y: Vec<f64> = (0..n).map(|_| rng.symmetric()).collect();
            for _ in 0..8 {
                let mut z = lu.solve(&y);
                for _ in 0..2 {
                    for b in &out[cluster_start..j] {
                        let c = dot(b, &z);
                        for (zi, bi) in z.iter_mut().zip(b) {
                            *zi -= c * bi;
                        }
                    }
                }
                let nz = norm(&z);
                if nz == 0.0 || !nz.is_finite() {
                    break;
                }
                y = z.iter().map(|x| x / nz).collect();
                if self.residual(&y, lambda) <= 4.0 * EPS * tnorm * libm::sqrt(n as f64) {
                    break;
                }
            }
            out.push(y);
        }
        out.into_iter().map(|y| self.back_transform(y)).collect()
    }

    fn residual(&self, y: &[f64], lambda: f64) -> f64 {
        let n = self.len();
        let mut acc = 0.0;
        for i in 0..n {
            let mut t = (self.diag[i] - lambda) * y[i];
            if i > 0 {
                t += self.off[i - 1] * y[i - 1];
            }
            if i + 1 < n {
                t += self.off[i] * y[i + 1];
            }
            acc += t * t;
        }
        libm::sqrt(acc)
    }

    fn back_transform(&self, mut y: Vec<f64>) -> Vec<f64> {
        for (k, (v, beta)) in self.reflectors.iter().enumerate().rev() {
            if *beta == 0.0 {
                continue;
            }
            let tail = &mut y[k + 1..];
            let c = beta * dot(v, tail);
            for (t, vi) in tail.iter_mut().zip(v) {
                *t -= c * vi;
            }
        }
        y
    }

    /// All eigenpairs, ascending, with eigenvectors accumulated through QL.
    pub fn full(&self) -> Result<(Vec<f64>, Vec<Vec<f64>>), SolverError> {
        let n = self.len();
        let mut d = self.diag.clone();
        let mut e = self.off.clone();
        // rows of z are eigenvectors of T
        let mut z = alloc::vec![0.0; n * n];
        for i in 0..n {
            z[i * n + i] = 1.0;
        }
        implicit_ql(&mut d, &mut e, Some(&mut z))?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
        let values = order.iter().map(|&i| d[i]).collect();
        let vectors = order
            .iter()
            .map(|&i| self.back_transform(z[i * n..(i + 1) * n].to_vec()))
            .collect();
        Ok((values, vectors))
    }
}

// Householder vector annihilating column `k` below its subdiagonal, as
// `(v, beta, alpha)`; `None` when the column is already reduced.
fn reflector(m: &[f64], n: usize, k: usize) -> Option<(Vec<f64>, f64, f64)> {
    let x: Vec<f64> = (k + 1..n).map(|i| m[i * n + k]).collect();
    if norm(&x[1..]) == 0.0 {
        return None;
    }
    let xnorm = norm(&x);
    let alpha = if x[0] > 0.0 { -xnorm } else { xnorm };
    let mut v = x;
    v[0] -= alpha;
    let beta = 2.0 / dot(&v, &v);
    Some((v, beta, alpha))
}

// out = A[s.., s..] v using the lower triangle only.
fn lower_matvec(m: &[f64], n: usize, s: usize, v: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|x| *x = 0.0);
    for i in 0..n - s {
        let base = (s + i) * n + s;
        let row = &m[base..base + i];
        let vi = v[i];
        let mut acc = 0.0;
        for ((&a, &vj), pj) in row.iter().zip(&v[..i]).zip(out[..i].iter_mut()) {
            acc += a * vj;
            *pj += a * vi;
        }
        out[i] += acc + m[base + i] * vi;
    }
}

/// Full symmetric eigendecomposition, eigenvalues ascending.
pub fn symmetric_eigen_full(a: &DenseMatrix) -> Result<(Vec<f64>, Vec<Vec<f64>>), SolverError> {
    Tridiagonal::new(a).full()
}

// Implicit QL with Wilkinson-type shifts. `z`, when given, holds row vectors
// that receive the same plane rotations.
fn implicit_ql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>) -> Result<(), SolverError> {
    let n = d.len();
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= EPS * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > QL_MAX_SWEEPS {
                return Err(SolverError::NoConvergence {
                    stage: "tridiagonal QL",
                    iterations: sweeps,
                    residual: e[l].abs(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = libm::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { r.abs() } else { -r.abs() });
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = libm::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    let (lo, hi) = z.split_at_mut((i + 1) * n);
                    let zi = &mut lo[i * n..];
                    let zi1 = &mut hi[..n];
                    for (a, bb) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let f = *bb;
                        *bb = s * *a + c * f;
                        *a = c * *a - s * f;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

// LU factorization of T - shift I with partial pivoting; U has two
// superdiagonals.
struct TridiagonalLu {
    diag: Vec<f64>,
    sup1: Vec<f64>,
    sup2: Vec<f64>,
    mult: Vec<f64>,
    swapped: Vec<bool>,
    tiny: f64,
}

impl TridiagonalLu {
    fn factor(d: &[f64], e: &[f64], shift: f64, tiny: f64) -> Self {
        let n = d.len();
        let mut diag: Vec<f64> = d.iter().map(|x| x - shift).collect();
        let mut sup1: Vec<f64> = e.to_vec();
        let mut sup2 = alloc::vec![0.0; n];
        let mut mult = alloc::vec![0.0; n];
        let mut swapped = alloc::vec![false; n];
        for i in 0..n.saturating_sub(1) {
            let sub = e[i];
            if diag[i].abs() >= sub.abs() {
                let piv = if diag[i] == 0.0 { tiny } else { diag[i] };
                diag[i] = piv;
                let m = sub / piv;
                mult[i] = m;
                diag[i + 1] -= m * sup1[i];
            } else {
                let (a, b) = (diag[i], sup1[i]);
                let (d1, e1) = (diag[i + 1], if i + 2 < n { sup1[i + 1] } else { 0.0 });
                diag[i] = sub;
                sup1[i] = d1;
                sup2[i] = e1;
                let m = a / sub;
                mult[i] = m;
                swapped[i] = true;
                diag[i + 1] = b - m * d1;
                if i + 2 < n {
                    sup1[i + 1] = -m * e1;
                }
            }
        }
        Self {
            diag,
            sup1,
            sup2,
            mult,
            swapped,
            tiny,
        }
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let mut y = rhs.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                y.swap(i, i + 1);
            }
            y[i + 1] -= self.mult[i] * y[i];
        }
        let mut x = alloc::vec![0.0; n];
        for i in (0..n).rev() {
            let mut t = y[i];
            if i + 1 < n {
                t -= self.sup1[i] * x[i + 1];
            }
            if i + 2 < n {
                t -= self.sup2[i] * x[i + 2];
            }
            let mut piv = self.diag[i];
            if piv.abs() < self.tiny {
                piv = if piv < 0.0 { -self.tiny } else { self.tiny };
            }
            x[i] = t / piv;
        }
        x
    }
}
