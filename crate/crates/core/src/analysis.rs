//! Hodge spectral clustering of simplices and HGC role scores.

use alloc::vec::Vec;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::complex::ComplexSlice;
use crate::spectral::{
    hodge_operators, spectrum_of, EigenCount, EigenKind, HodgeOperators, SpectralError, Tolerances, TypedSpectrum,
    DENSE_LIMIT,
};

pub const KMEANS_RESTARTS: usize = 10;
pub const KMEANS_MAX_ITERATIONS: usize = 300;
pub const KMEANS_SHIFT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("cannot form {clusters} clusters from {distinct} distinct points")]
    Infeasible { clusters: usize, distinct: usize },
    #[error("spectral clustering needs at least 2 clusters, got {0}")]
    TooFewClusters(usize),
    #[error("points have inconsistent dimensions")]
    RaggedPoints,
    #[error("requested {requested} {mode} eigenvectors but only {available} exist")]
    InsufficientSpectrum {
        mode: EigenMode,
        requested: usize,
        available: usize,
    },
    #[error("HGC values need at least one eigenpair")]
    EmptySelection,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    /// Cluster per point, numbered by first appearance.
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    /// Inertia after every assignment step of the winning restart.
    pub history: Vec<f64>,
    /// Whether some cluster ended up empty.
    pub degenerate: bool,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

// nearest centroid; ties go to the lowest cluster index
fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist(p, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Lloyd's k-means from greedy k-means++ seeding, best of
/// [`KMEANS_RESTARTS`] restarts. All restarts derive from `seed`.
pub fn kmeans(points: &[Vec<f64>], c: usize, seed: u64) -> Result<KMeansResult, AnalysisError> {
    let dim = points.first().map_or(0, Vec::len);
    if points.iter().any(|p| p.len() != dim) {
        return Err(AnalysisError::RaggedPoints);
    }
    let mut sorted: Vec<&Vec<f64>> = points.iter().collect();
    sorted.sort_by(|a, b| lex_cmp(a, b));
    sorted.dedup_by(|a, b| lex_cmp(a, b).is_eq());
    if c == 0 || c > sorted.len() {
        return Err(AnalysisError::Infeasible {
            clusters: c,
            distinct: sorted.len(),
        });
    }
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeansResult> = None;
    for _ in 0..KMEANS_RESTARTS {
        let mut rng = ChaCha8Rng::seed_from_u64(master.next_u64());
        let run = lloyd(points, seed_centroids(points, c, &mut rng));
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    let mut best = best.expect("at least one restart");
    relabel(&mut best);
    Ok(best)
}

fn lex_cmp(a: &[f64], b: &[f64]) -> core::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(core::cmp::Ordering::Equal)
}

fn seed_centroids(points: &[Vec<f64>], c: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let trials = 2 + libm::log(c as f64) as usize;
    let mut centroids = alloc::vec![points[rng.random_range(0..points.len())].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < c {
        let total: f64 = d2.iter().sum();
        let mut best: Option<(f64, usize)> = None;
        for _ in 0..trials {
            let mut target = rng.random::<f64>() * total;
            let mut pick = d2.iter().rposition(|&d| d > 0.0).unwrap_or(0);
            for (i, &d) in d2.iter().enumerate() {
                if d > 0.0 && target < d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            let potential: f64 = points
                .iter()
                .zip(&d2)
                .map(|(p, &d)| d.min(sq_dist(p, &points[pick])))
                .sum();
            if best.is_none_or(|(b, _)| potential < b) {
                best = Some((potential, pick));
            }
        }
        let pick = best.map_or(0, |b| b.1);
        let center = points[pick].clone();
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &center));
        }
        centroids.push(center);
    }
    centroids
}

fn lloyd(points: &[Vec<f64>], mut centroids: Vec<Vec<f64>>) -> KMeansResult {
    let c = centroids.len();
    let dim = centroids[0].len();
    let mut labels = alloc::vec![0; points.len()];
    let mut history = Vec::new();
    let mut degenerate = false;
    for _ in 0..KMEANS_MAX_ITERATIONS {
        let mut inertia = 0.0;
        for (l, p) in labels.iter_mut().zip(points) {
            let (j, d) = nearest(p, &centroids);
            *l = j;
            inertia += d;
        }
        history.push(inertia);
        let mut sums = alloc::vec![alloc::vec![0.0; dim]; c];
        let mut counts = alloc::vec![0usize; c];
        for (&l, p) in labels.iter().zip(points) {
            counts[l] += 1;
            for (s, x) in sums[l].iter_mut().zip(p) {
                *s += x;
            }
        }
        let mut shift = 0.0f64;
        degenerate = false;
        for j in 0..c {
            if counts[j] == 0 {
                // an empty cluster keeps its centroid
                degenerate = true;
                continue;
            }
            let next: Vec<f64> = sums[j].iter().map(|s| s / counts[j] as f64).collect();
            shift = shift.max(libm::sqrt(sq_dist(&next, &centroids[j])));
            centroids[j] = next;
        }
        if shift < KMEANS_SHIFT_TOLERANCE {
            break;
        }
    }
    let mut inertia = 0.0;
    for (l, p) in labels.iter_mut().zip(points) {
        let (j, d) = nearest(p, &centroids);
        *l = j;
        inertia += d;
    }
    history.push(inertia);
    KMeansResult {
        labels,
        centroids,
        inertia,
        history,
        degenerate,
    }
}

fn relabel(r: &mut KMeansResult) {
    let c = r.centroids.len();
    let mut map = alloc::vec![usize::MAX; c];
    let mut next = 0;
    for &l in &r.labels {
        if map[l] == usize::MAX {
            map[l] = next;
            next += 1;
        }
    }
    for m in map.iter_mut().filter(|m| **m == usize::MAX) {
        *m = next;
        next += 1;
    }
    for l in &mut r.labels {
        *l = map[*l];
    }
    let mut centroids = alloc::vec![Vec::new(); c];
    for (old, c) in r.centroids.drain(..).enumerate() {
        centroids[map[old]] = c;
    }
    r.centroids = centroids;
}

/// Which eigenvectors feed the clustering embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EigenMode {
    Gradient,
    Harmonic,
    Curl,
    /// The smallest eigenpairs regardless of type.
    Total,
}

impl EigenMode {
    pub fn accepts(self, kind: EigenKind) -> bool {
        match self {
            EigenMode::Gradient => kind == EigenKind::Gradient,
            EigenMode::Harmonic => kind == EigenKind::Harmonic,
            EigenMode::Curl => kind == EigenKind::Curl,
            EigenMode::Total => true,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EigenMode::Gradient => "gradient",
            EigenMode::Harmonic => "harmonic",
            EigenMode::Curl => "curl",
            EigenMode::Total => "total",
        }
    }
}

impl core::fmt::Display for EigenMode {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for EigenMode {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "gradient" => Ok(EigenMode::Gradient),
            "harmonic" => Ok(EigenMode::Harmonic),
            "curl" => Ok(EigenMode::Curl),
            "total" => Ok(EigenMode::Total),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub degree: usize,
    pub clusters: usize,
    pub mode: EigenMode,
    /// Label per n-simplex of the slice, in slice order.
    pub labels: Vec<usize>,
    /// Sign-fixed embedding row per n-simplex.
    pub embedding: Vec<Vec<f64>>,
    /// Eigenvalues of the eigenvectors used.
    pub eigenvalues: Vec<f64>,
    pub inertia: f64,
    pub degenerate: bool,
}

/// Rows `v(σ) = (v_1[σ], …, v_h[σ])`, each multiplied by the sign of its
/// coordinate sum; a zero sum defers to the sign of the largest-magnitude
/// coordinate (first one on ties).
pub fn sign_fixed_embedding(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let rows = vectors.first().map_or(0, Vec::len);
    (0..rows)
        .map(|s| {
            let mut row: Vec<f64> = vectors.iter().map(|v| v[s]).collect();
            let sum: f64 = row.iter().sum();
            let sign = if sum != 0.0 {
                sum
            } else {
                row.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m })
            };
            if sign < 0.0 {
                row.iter_mut().for_each(|x| *x = -*x);
            }
            row
        })
        .collect()
}

/// Hodge spectral clustering of the n-simplices of a slice.
pub fn hodge_spectral_clustering(
    slice: &ComplexSlice<'_>,
    n: usize,
    h: usize,
    c: usize,
    mode: EigenMode,
    seed: u64,
) -> Result<ClusterAssignment, AnalysisError> {
    let ops = hodge_operators(slice, n)?;
    cluster_operators(&ops, h, c, mode, seed, &Tolerances::default())
}

/// The `h` smallest eigenpairs accepted by `mode`, growing the solve until
/// enough are found.
pub fn select_eigenvectors(
    ops: &HodgeOperators,
    h: usize,
    mode: EigenMode,
    tol: &Tolerances,
) -> Result<(Vec<f64>, Vec<Vec<f64>>), AnalysisError> {
    let size = ops.size();
    // a dense solve costs the same for any m, so ask generously up front
    let mut m = match mode {
        EigenMode::Total => h,
        _ if size <= DENSE_LIMIT => (4 * h).max(h + 40),
        _ => (2 * h).max(h + 8),
    }
    .min(size);
    loop {
        let spectrum = spectrum_of(ops, EigenCount::Smallest(m), tol)?;
        let picked: Vec<_> = spectrum.pairs.iter().filter(|p| mode.accepts(p.kind)).take(h).collect();
        if picked.len() == h {
            return Ok((
                picked.iter().map(|p| p.lambda).collect(),
                picked.into_iter().map(|p| p.vector.clone()).collect(),
            ));
        }
        if m >= size {
            return Err(AnalysisError::InsufficientSpectrum {
                mode,
                requested: h,
                available: picked.len(),
            });
        }
        m = (2 * m).min(size);
    }
}

/// [`hodge_spectral_clustering`] on prebuilt operators.
pub fn cluster_operators(
    ops: &HodgeOperators,
    h: usize,
    c: usize,
    mode: EigenMode,
    seed: u64,
    tol: &Tolerances,
) -> Result<ClusterAssignment, AnalysisError> {
    if c < 2 {
        return Err(AnalysisError::TooFewClusters(c));
    }
    let (eigenvalues, vectors) = select_eigenvectors(ops, h, mode, tol)?;
    let embedding = sign_fixed_embedding(&vectors);
    let km = kmeans(&embedding, c, seed)?;
    Ok(ClusterAssignment {
        degree: ops.degree(),
        clusters: c,
        mode,
        labels: km.labels,
        embedding,
        eigenvalues,
        inertia: km.inertia,
        degenerate: km.degenerate,
    })
}

/// Majority label of the n-simplices around each vertex of the slice (in
/// slice vertex order); ties go to the smaller label, and vertices without
/// incident n-simplices get `None`.
pub fn node_clustering(assignment: &ClusterAssignment, slice: &ComplexSlice<'_>) -> Vec<Option<usize>> {
    let vertices = slice.vertex_ids();
    let mut counts = alloc::vec![alloc::vec![0usize; assignment.clusters]; vertices.len()];
    for (s, &label) in slice.simplices(assignment.degree).zip(&assignment.labels) {
        for v in s.vertices() {
            if let Ok(i) = vertices.binary_search(v) {
                counts[i][label] += 1;
            }
        }
    }
    counts
        .iter()
        .map(|c| {
            let (label, &n) = c.iter().enumerate().rev().max_by_key(|&(_, n)| *n)?;
            (n > 0).then_some(label)
        })
        .collect()
}

/// Relevance of one simplex to the harmonic, gradient and curl eigenvectors.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HgcTriple {
    pub harmonic: f64,
    pub gradient: f64,
    pub curl: f64,
}

/// HGC values of the n-simplices from the `k` smallest eigenpairs.
pub fn hgc_values(slice: &ComplexSlice<'_>, n: usize, k: usize) -> Result<Vec<HgcTriple>, AnalysisError> {
    if k == 0 {
        return Err(AnalysisError::EmptySelection);
    }
    let ops = hodge_operators(slice, n)?;
    let spectrum = spectrum_of(&ops, EigenCount::Smallest(k), &Tolerances::default())?;
    Ok(hgc_from_spectrum(&spectrum, ops.size()))
}

/// HGC values from an already typed spectrum over `size` simplices.
pub fn hgc_from_spectrum(spectrum: &TypedSpectrum, size: usize) -> Vec<HgcTriple> {
    let mut out = alloc::vec![HgcTriple::default(); size];
    let e_max = spectrum
        .pairs
        .iter()
        .flat_map(|p| p.vector.iter())
        .fold(0.0f64, |m, x| m.max(x.abs()));
    if e_max == 0.0 {
        return out;
    }
    for p in &spectrum.pairs {
        for (t, x) in out.iter_mut().zip(&p.vector) {
            let slot = match p.kind {
                EigenKind::Harmonic => &mut t.harmonic,
                EigenKind::Gradient => &mut t.gradient,
                EigenKind::Curl => &mut t.curl,
            };
            *slot = slot.max(x.abs() / e_max);
        }
    }
    out
}
