//! Hodge Laplacians of a slice and their typed spectra.
//!
//! `L_k = B_kᵀ B_k + B_{k+1} B_{k+1}ᵀ` acts on signals over the k-simplices.
//! Every eigenvector of `L_k` can be chosen inside exactly one of the three
//! Hodge subspaces: the kernel (harmonic), the image of `B_kᵀ` (gradient) or
//! the image of `B_{k+1}` (curl). [`spectrum_at`] runs the whole pipeline and
//! labels each eigenpair accordingly.

mod solve;

use alloc::vec::Vec;

use thiserror::Error;

use crate::complex::{boundary_matrix, sublevel, ComplexError, ComplexSlice, FilteredComplex, SparseSignMatrix};
use crate::linalg::{axpy, conjugate_gradient, dot, norm, symmetric_eigen_full, CsrMatrix, DenseMatrix, SolverError};

pub use solve::{eigendecompose, EigenCount, Eigensystem, DENSE_LIMIT};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("eigenvalue {lambda:e} has a mixed gradient/curl eigenvector that cannot be rotated apart")]
    MixedEigenspace { lambda: f64 },
    #[error("eigenvalue {lambda:e} cannot be typed (residual_up {residual_up:e}, residual_down {residual_down:e})")]
    Unclassifiable {
        lambda: f64,
        residual_up: f64,
        residual_down: f64,
    },
    #[error("found {found} harmonic eigenpairs but the rank formula gives {expected}")]
    HarmonicMismatch { found: usize, expected: usize },
}

/// Scale-relative thresholds, each multiplied by `max(1, λmax)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Eigenvalues at or below this are harmonic.
    pub zero: f64,
    /// A residual `‖B_{k+1}ᵀv‖` or `‖B_k v‖` at or below this counts as zero.
    pub residual: f64,
    /// Consecutive eigenvalues closer than this form one eigenspace.
    pub degeneracy: f64,
    /// Required accuracy `‖Lv - λv‖` of every returned pair.
    pub eigen_residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            zero: 1e-9,
            residual: 1e-7,
            degeneracy: 1e-6,
            eigen_residual: 1e-8,
        }
    }
}

impl Tolerances {
    fn scaled(&self, lambda_max: f64) -> Self {
        let s = lambda_max.max(1.0);
        Self {
            zero: self.zero * s,
            residual: self.residual * s,
            degeneracy: self.degeneracy * s,
            eigen_residual: self.eigen_residual * s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EigenKind {
    Harmonic,
    Gradient,
    Curl,
}

impl EigenKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EigenKind::Harmonic => "harmonic",
            EigenKind::Gradient => "gradient",
            EigenKind::Curl => "curl",
        }
    }
}

impl core::fmt::Display for EigenKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for EigenKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "harmonic" => Ok(EigenKind::Harmonic),
            "gradient" => Ok(EigenKind::Gradient),
            "curl" => Ok(EigenKind::Curl),
            _ => Err(()),
        }
    }
}

/// Laplacian pieces of one slice in one degree.
#[derive(Debug, Clone)]
pub struct HodgeOperators {
    degree: usize,
    threshold: f64,
    b_down: SparseSignMatrix,
    b_up: SparseSignMatrix,
    down: CsrMatrix,
    up: CsrMatrix,
    laplacian: CsrMatrix,
    // B_k B_kᵀ and B_{k+1}ᵀ B_{k+1}, the normal equations of the projections
    grad_normal: CsrMatrix,
    curl_normal: CsrMatrix,
}

/// Assembles `L_k^down`, `L_k^up` and `L_k` for the slice.
pub fn hodge_operators(slice: &ComplexSlice<'_>, k: usize) -> Result<HodgeOperators, SpectralError> {
    let max = slice.parent().dimension();
    if k > max {
        return Err(ComplexError::Dimension { k, max }.into());
    }
    let b_down = boundary_matrix(slice, k)?;
    let b_up = boundary_matrix(slice, k + 1)?;
    Ok(HodgeOperators::from_boundaries(k, slice.threshold(), b_down, b_up))
}

impl HodgeOperators {
    /// Builds the operators from `B_k` and `B_{k+1}` directly.
    ///
    /// # Panics
    /// If the column count of `b_down` differs from the row count of `b_up`.
    pub fn from_boundaries(degree: usize, threshold: f64, b_down: SparseSignMatrix, b_up: SparseSignMatrix) -> Self {
        assert_eq!(b_down.ncols(), b_up.nrows(), "boundary shapes do not chain");
        let down = b_down.gram_columns();
        let up = b_up.gram_rows();
        let laplacian = down.add(&up);
        let grad_normal = b_down.gram_rows();
        let curl_normal = b_up.gram_columns();
        Self {
            degree,
            threshold,
            b_down,
            b_up,
            down,
            up,
            laplacian,
            grad_normal,
            curl_normal,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Number of k-simplices.
    pub fn size(&self) -> usize {
        self.laplacian.nrows()
    }

    /// `B_k`.
    pub fn boundary_down(&self) -> &SparseSignMatrix {
        &self.b_down
    }

    /// `B_{k+1}`.
    pub fn boundary_up(&self) -> &SparseSignMatrix {
        &self.b_up
    }

    pub fn down(&self) -> &CsrMatrix {
        &self.down
    }

    pub fn up(&self) -> &CsrMatrix {
        &self.up
    }

    pub fn laplacian(&self) -> &CsrMatrix {
        &self.laplacian
    }

    /// `(‖B_{k+1}ᵀ v‖, ‖B_k v‖)`.
    pub fn residuals(&self, v: &[f64]) -> (f64, f64) {
        (norm(&self.b_up.tmul_vec(v)), norm(&self.b_down.mul_vec(v)))
    }

    /// The same operators with the orientation of the flagged k-simplices
    /// reversed: columns of `B_k` and rows of `B_{k+1}` change sign.
    pub fn reoriented(&self, flips: &[bool]) -> Self {
        Self::from_boundaries(
            self.degree,
            self.threshold,
            self.b_down.flip_columns(flips),
            self.b_up.flip_rows(flips),
        )
    }
}

/// One eigenpair with its Hodge type.
#[derive(Debug, Clone, PartialEq)]
pub struct TypedEigenpair {
    pub lambda: f64,
    pub vector: Vec<f64>,
    pub kind: EigenKind,
    pub residual_up: f64,
    pub residual_down: f64,
}

/// The smallest eigenpairs of `L_k` on one slice, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct TypedSpectrum {
    pub degree: usize,
    pub threshold: f64,
    /// Largest eigenvalue of the whole operator (estimated on large slices).
    pub lambda_max: f64,
    pub pairs: Vec<TypedEigenpair>,
}

impl TypedSpectrum {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn count(&self, kind: EigenKind) -> usize {
        self.pairs.iter().filter(|p| p.kind == kind).count()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.pairs.iter().map(|p| p.lambda)
    }

    pub fn of_kind(&self, kind: EigenKind) -> impl Iterator<Item = &TypedEigenpair> + '_ {
        self.pairs.iter().filter(move |p| p.kind == kind)
    }
}

/// Decomposition `v = gradient + harmonic + curl`.
#[derive(Debug, Clone, PartialEq)]
pub struct HodgeComponents {
    pub gradient: Vec<f64>,
    pub harmonic: Vec<f64>,
    pub curl: Vec<f64>,
}

/// Orthogonal Hodge decomposition of a k-signal.
///
/// The gradient part is `B_kᵀ x` with `B_k B_kᵀ x = B_k v` and the curl part
/// `B_{k+1} y` with `B_{k+1}ᵀ B_{k+1} y = B_{k+1}ᵀ v`, both solved by
/// conjugate gradients; the harmonic part is what remains. The remainder is
/// re-projected until it no longer has a measurable gradient or curl part.
pub fn hodge_project(ops: &HodgeOperators, v: &[f64]) -> HodgeComponents {
    let n = ops.size();
    assert_eq!(v.len(), n, "signal length does not match the operator");
    let mut gradient = alloc::vec![0.0; n];
    let mut curl = alloc::vec![0.0; n];
    let mut rest = v.to_vec();
    let vnorm = norm(v);
    let mut last = f64::INFINITY;
    for _ in 0..4 {
        let g = project(&ops.grad_normal, &rest, |x| ops.b_down.mul_vec(x), |y| ops.b_down.tmul_vec(y));
        let c = project(&ops.curl_normal, &rest, |x| ops.b_up.tmul_vec(x), |y| ops.b_up.mul_vec(y));
        axpy(1.0, &g, &mut gradient);
        axpy(1.0, &c, &mut curl);
        axpy(-1.0, &g, &mut rest);
        axpy(-1.0, &c, &mut rest);
        let moved = libm::sqrt(dot(&g, &g) + dot(&c, &c));
        if moved <= 1e-15 * vnorm || moved >= last {
            break;
        }
        last = moved;
    }
    HodgeComponents {
        gradient,
        harmonic: rest,
        curl,
    }
}

// Orthogonal projection onto the image of `lift` (the adjoint of `restrict`),
// given the normal matrix `restrict ∘ lift`.
fn project(
    normal: &CsrMatrix,
    v: &[f64],
    restrict: impl Fn(&[f64]) -> Vec<f64>,
    lift: impl Fn(&[f64]) -> Vec<f64>,
) -> Vec<f64> {
    if normal.nrows() == 0 {
        return alloc::vec![0.0; v.len()];
    }
    let rhs = restrict(v);
    let iters = 4 * normal.nrows() + 50;
    let (x, _) = conjugate_gradient(|p, out| normal.mul_vec_into(p, out), &rhs, 1e-14, iters);
    lift(&x)
}

/// Types every pair of an eigensystem.
///
/// Pairs with `λ ≤ τ_zero` are harmonic. The others are gradient when
/// `‖B_{k+1}ᵀv‖ ≤ τ < ‖B_k v‖` and curl in the opposite case. When an
/// eigenspace contains a vector with both residuals above `τ`, the space is
/// split into its gradient and curl parts and each part re-diagonalized; a
/// one-dimensional space that is still mixed is an error. Pairs beyond the
/// requested count are dropped after typing.
pub fn classify(ops: &HodgeOperators, system: Eigensystem, tol: &Tolerances) -> Result<TypedSpectrum, SpectralError> {
    let scaled = tol.scaled(system.lambda_max);
    let Eigensystem {
        values,
        vectors,
        lambda_max,
        requested,
    } = system;
    let mut pairs = Vec::with_capacity(values.len());
    let mut i = 0;
    while i < values.len() {
        let mut j = i + 1;
        while j < values.len() && values[j] - values[j - 1] <= scaled.degeneracy {
            j += 1;
        }
        let mut group: Vec<(f64, Vec<f64>)> = Vec::new();
        for (l, v) in values[i..j].iter().zip(&vectors[i..j]) {
            if *l <= scaled.zero {
                let (residual_up, residual_down) = ops.residuals(v);
                pairs.push(TypedEigenpair {
                    lambda: *l,
                    vector: v.clone(),
                    kind: EigenKind::Harmonic,
                    residual_up,
                    residual_down,
                });
            } else {
                group.push((*l, v.clone()));
            }
        }
        type_group(ops, group, &scaled, &mut pairs)?;
        i = j;
    }
    pairs.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    pairs.truncate(requested);
    for p in &mut pairs {
        canonicalize_sign(&mut p.vector);
    }
    Ok(TypedSpectrum {
        degree: ops.degree(),
        threshold: ops.threshold(),
        lambda_max,
        pairs,
    })
}

fn kind_of(r_up: f64, r_down: f64, tau: f64) -> Option<EigenKind> {
    match (r_up <= tau, r_down <= tau) {
        (true, false) => Some(EigenKind::Gradient),
        (false, true) => Some(EigenKind::Curl),
        _ => None,
    }
}

fn type_group(
    ops: &HodgeOperators,
    group: Vec<(f64, Vec<f64>)>,
    tol: &Tolerances,
    out: &mut Vec<TypedEigenpair>,
) -> Result<(), SpectralError> {
    if group.is_empty() {
        return Ok(());
    }
    let residuals: Vec<(f64, f64)> = group.iter().map(|(_, v)| ops.residuals(v)).collect();
    let mixed = residuals.iter().any(|&(u, d)| u > tol.residual && d > tol.residual);
    let group = if mixed {
        if group.len() == 1 {
            return Err(SpectralError::MixedEigenspace { lambda: group[0].0 });
        }
        log::debug!(
            "rotating a {}-dimensional mixed eigenspace at lambda {:e}",
            group.len(),
            group[0].0
        );
        split_eigenspace(ops, group)?
    } else {
        group
    };
    for (lambda, vector) in group {
        let (residual_up, residual_down) = ops.residuals(&vector);
        let kind = kind_of(residual_up, residual_down, tol.residual).ok_or(if residual_up > tol.residual {
            SpectralError::MixedEigenspace { lambda }
        } else {
            SpectralError::Unclassifiable {
                lambda,
                residual_up,
                residual_down,
            }
        })?;
        out.push(TypedEigenpair {
            lambda,
            vector,
            kind,
            residual_up,
            residual_down,
        });
    }
    Ok(())
}

// Within an eigenspace E of eigenvalue λ > 0, L_down restricted to E equals
// λ times the projection onto the gradient subspace, so diagonalizing
// Uᵀ L_down U separates E into gradient (≈ λ) and curl (≈ 0) directions.
// Each part is then diagonalized with respect to L.
fn split_eigenspace(ops: &HodgeOperators, group: Vec<(f64, Vec<f64>)>) -> Result<Vec<(f64, Vec<f64>)>, SpectralError> {
    let lambda_min = group.iter().map(|g| g.0).fold(f64::INFINITY, f64::min);
    let basis: Vec<Vec<f64>> = group.into_iter().map(|g| g.1).collect();
    let (weights, rotation) = eigen_of_gram(&basis, ops.down())?;
    let rotated = combine(&basis, &rotation);
    let mut gradient = Vec::new();
    let mut curl = Vec::new();
    for (w, v) in weights.into_iter().zip(rotated) {
        if w > 0.5 * lambda_min {
            gradient.push(v);
        } else {
            curl.push(v);
        }
    }
    let mut out = Vec::with_capacity(gradient.len() + curl.len());
    for part in [gradient, curl] {
        if part.is_empty() {
            continue;
        }
        let (values, rotation) = eigen_of_gram(&part, ops.laplacian())?;
        out.extend(values.into_iter().zip(combine(&part, &rotation)));
    }
    Ok(out)
}

// Eigen-decomposition of Uᵀ A U for an orthonormal set U.
fn eigen_of_gram(u: &[Vec<f64>], a: &CsrMatrix) -> Result<(Vec<f64>, Vec<Vec<f64>>), SolverError> {
    let d = u.len();
    let au: Vec<Vec<f64>> = u.iter().map(|x| a.mul_vec(x)).collect();
    let mut h = DenseMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..=i {
            let x = 0.5 * (dot(&u[i], &au[j]) + dot(&u[j], &au[i]));
            h.set(i, j, x);
            h.set(j, i, x);
        }
    }
    symmetric_eigen_full(&h)
}

fn combine(basis: &[Vec<f64>], coefficients: &[Vec<f64>]) -> Vec<Vec<f64>> {
    coefficients
        .iter()
        .map(|coef| {
            let mut v = alloc::vec![0.0; basis[0].len()];
            for (c, b) in coef.iter().zip(basis) {
                axpy(*c, b, &mut v);
            }
            let n = norm(&v);
            if n > 0.0 {
                v.iter_mut().for_each(|x| *x /= n);
            }
            v
        })
        .collect()
}

/// Flips `v` so that its largest-magnitude entry is positive; entries within
/// a relative `1e-9` of the maximum count as ties, won by the lowest index.
pub fn canonicalize_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return;
    }
    let cutoff = max * (1.0 - 1e-9);
    if let Some(&lead) = v.iter().find(|x| x.abs() >= cutoff) {
        if lead < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Smallest eigenpairs of `L_k` on the sublevel slice at `t`, typed.
///
/// At most `count` pairs are returned (fewer when the slice has fewer
/// k-simplices). The number of harmonic pairs is checked against
/// `|S_k| - rank B_k - rank B_{k+1}`.
pub fn spectrum_at(
    fc: &FilteredComplex,
    t: f64,
    k: usize,
    count: EigenCount,
    tol: &Tolerances,
) -> Result<TypedSpectrum, SpectralError> {
    let slice = sublevel(fc, t);
    let ops = hodge_operators(&slice, k)?;
    spectrum_of(&ops, count, tol)
}

/// [`spectrum_at`] for prebuilt operators.
pub fn spectrum_of(ops: &HodgeOperators, count: EigenCount, tol: &Tolerances) -> Result<TypedSpectrum, SpectralError> {
    let count = count.clamp(ops.size());
    let system = eigendecompose(ops, count, tol)?;
    let spectrum = classify(ops, system, tol)?;
    let betti = ops.size() - ops.boundary_down().rank_mod_p() - ops.boundary_up().rank_mod_p();
    let expected = betti.min(spectrum.len());
    let found = spectrum.count(EigenKind::Harmonic);
    if found != expected {
        return Err(SpectralError::HarmonicMismatch { found, expected });
    }
    Ok(spectrum)
}
