//! Following eigenvectors through a filtration.
//!
//! Two eigenvectors at steps `t ≤ t′` are compared by their persistent
//! eigenvector similarity, the absolute cosine after zero-padding the earlier
//! vector into the later slice ([`pes`]). Consecutive steps are linked by
//! mutual best matches ([`pem`]) and the links are chained into
//! [`Trajectory`]s.

use alloc::vec::Vec;

use thiserror::Error;

use crate::complex::{inclusion_map, sublevel, ComplexError, FilteredComplex, InclusionMap};
use crate::linalg::norm;
use crate::spectral::{spectrum_of, hodge_operators, EigenCount, EigenKind, SpectralError, Tolerances, TypedSpectrum};

/// Similarities this close to the best one count as ties.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PersistenceError {
    #[error("similarity of a zero vector is undefined")]
    ZeroVector,
    #[error("vector of length {found} does not fit an inclusion map of {expected} simplices")]
    LengthMismatch { expected: usize, found: usize },
    #[error("filtration grid must be non-empty and strictly ascending")]
    InvalidGrid,
    #[error("expected {expected} spectra for the grid, got {found}")]
    SpectrumCount { expected: usize, found: usize },
    #[error("step {step} (t = {t}): {source}")]
    Step {
        step: usize,
        t: f64,
        #[source]
        source: SpectralError,
    },
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// Persistent eigenvector similarity `|ι(v)ᵀ v′| / (‖v‖ ‖v′‖)`, clamped to
/// `[0, 1]`.
pub fn pes(v: &[f64], v_prime: &[f64], iota: &InclusionMap) -> Result<f64, PersistenceError> {
    if v.len() != iota.source_len() {
        return Err(PersistenceError::LengthMismatch {
            expected: iota.source_len(),
            found: v.len(),
        });
    }
    if v_prime.len() != iota.target_len() {
        return Err(PersistenceError::LengthMismatch {
            expected: iota.target_len(),
            found: v_prime.len(),
        });
    }
    let (a, b) = (norm(v), norm(v_prime));
    if a == 0.0 || b == 0.0 {
        return Err(PersistenceError::ZeroVector);
    }
    Ok(raw_similarity(v, v_prime, iota) / (a * b)).map(|s| s.min(1.0))
}

fn raw_similarity(v: &[f64], v_prime: &[f64], iota: &InclusionMap) -> f64 {
    iota.as_slice()
        .iter()
        .zip(v)
        .map(|(&j, x)| x * v_prime[j])
        .sum::<f64>()
        .abs()
}

/// Result of [`pem`]: `(left index, right index, PES)` triples sorted by
/// left index, plus whatever stayed unmatched on either side.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Matching {
    pub pairs: Vec<(usize, usize, f64)>,
    pub unmatched_left: Vec<usize>,
    pub unmatched_right: Vec<usize>,
    /// Number of argmax decisions that had to break a tie.
    pub ties: usize,
}

/// Persistent eigenvector matching: `v` and `v′` are paired when each is the
/// other's most similar vector and their similarity is at least `theta`.
///
/// Both sets are expected in ascending eigenvalue order, so breaking argmax
/// ties towards the lower index prefers the lower eigenvalue.
pub fn pem(
    left: &[Vec<f64>],
    right: &[Vec<f64>],
    iota: &InclusionMap,
    theta: f64,
) -> Result<Matching, PersistenceError> {
    let mut table = Vec::with_capacity(left.len() * right.len());
    for v in left {
        for w in right {
            table.push(pes(v, w, iota)?);
        }
    }
    let cols = right.len();
    let mut ties = 0;
    let mut argmax = |values: &mut dyn Iterator<Item = f64>| -> Option<usize> {
        let values: Vec<f64> = values.collect();
        let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut hits = values.iter().enumerate().filter(|(_, &s)| s >= best - TIE_TOLERANCE);
        let first = hits.next().map(|(i, _)| i);
        if hits.next().is_some() {
            ties += 1;
        }
        first
    };
    let row_best: Vec<Option<usize>> = (0..left.len())
        .map(|i| argmax(&mut table[i * cols..(i + 1) * cols].iter().copied()))
        .collect();
    let col_best: Vec<Option<usize>> = (0..cols)
        .map(|j| argmax(&mut (0..left.len()).map(|i| table[i * cols + j])))
        .collect();
    if ties > 0 {
        log::debug!("pem: broke {ties} similarity ties by eigenvalue order");
    }
    let mut m = Matching {
        ties,
        ..Matching::default()
    };
    let mut right_used = alloc::vec![false; cols];
    for (i, best) in row_best.iter().enumerate() {
        match *best {
            Some(j) if col_best[j] == Some(i) && table[i * cols + j] >= theta => {
                m.pairs.push((i, j, table[i * cols + j]));
                right_used[j] = true;
            }
            _ => m.unmatched_left.push(i),
        }
    }
    m.unmatched_right = (0..cols).filter(|&j| !right_used[j]).collect();
    Ok(m)
}

/// Thresholds at which spectra are computed.
#[derive(Debug, Clone, PartialEq)]
pub struct FiltrationGrid {
    thresholds: Vec<f64>,
}

impl FiltrationGrid {
    pub fn new(thresholds: Vec<f64>) -> Result<Self, PersistenceError> {
        if thresholds.is_empty()
            || thresholds.iter().any(|t| !t.is_finite())
            || thresholds.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(PersistenceError::InvalidGrid);
        }
        Ok(Self { thresholds })
    }

    /// The distinct filtration values of `fc`, optionally thinned to `steps`
    /// values spread uniformly by index (first and last always kept).
    pub fn from_complex(fc: &FilteredComplex, steps: Option<usize>) -> Result<Self, PersistenceError> {
        let all = fc.distinct_values();
        let thresholds = match steps {
            Some(m) if m < all.len() => {
                if m == 0 {
                    return Err(PersistenceError::InvalidGrid);
                }
                if m == 1 {
                    alloc::vec![all[all.len() - 1]]
                } else {
                    let last = (all.len() - 1) as f64;
                    let mut picked: Vec<f64> = (0..m)
                        .map(|i| all[libm::round(i as f64 * last / (m - 1) as f64) as usize])
                        .collect();
                    picked.dedup();
                    picked
                }
            }
            _ => all,
        };
        Self::new(thresholds)
    }

    /// `steps` evenly spaced thresholds from `lo` to `hi` inclusive.
    pub fn uniform(lo: f64, hi: f64, steps: usize) -> Result<Self, PersistenceError> {
        match steps {
            0 => Err(PersistenceError::InvalidGrid),
            1 => Self::new(alloc::vec![hi]),
            _ => Self::new(
                (0..steps)
                    .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
                    .collect(),
            ),
        }
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackOptions {
    pub degree: usize,
    /// Eigenpairs per step.
    pub budget: usize,
    /// Minimum similarity of a matched pair.
    pub theta: f64,
    pub tolerances: Tolerances,
}

impl Default for TrackOptions {
    fn default() -> Self {
        Self {
            degree: 1,
            budget: 40,
            theta: 0.5,
            tolerances: Tolerances::default(),
        }
    }
}

/// One eigenpair on a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub step: usize,
    /// Position of the pair in that step's spectrum.
    pub index: usize,
    pub lambda: f64,
    pub kind: EigenKind,
    /// Similarity to the previous point; `None` at birth.
    pub pes_prev: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub id: usize,
    pub points: Vec<TrajectoryPoint>,
    /// Last step the trajectory reached, or `None` while it is still alive at
    /// the final step of the grid.
    pub death: Option<usize>,
}

impl Trajectory {
    pub fn birth(&self) -> usize {
        self.points[0].step
    }

    pub fn last_step(&self) -> usize {
        self.points[self.points.len() - 1].step
    }

    /// Most frequent type along the trajectory; ties go to the most recent.
    pub fn dominant_kind(&self) -> EigenKind {
        let count = |k: EigenKind| self.points.iter().filter(|p| p.kind == k).count();
        let mut best = self.points[self.points.len() - 1].kind;
        for p in self.points.iter().rev() {
            if count(p.kind) > count(best) {
                best = p.kind;
            }
        }
        best
    }

    /// Steps at which the type differs from the previous step.
    pub fn type_changes(&self) -> Vec<usize> {
        self.points
            .windows(2)
            .filter(|w| w[0].kind != w[1].kind)
            .map(|w| w[1].step)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySet {
    pub degree: usize,
    pub thresholds: Vec<f64>,
    /// Ordered by birth, then by spectrum position at birth.
    pub trajectories: Vec<Trajectory>,
    /// `matchings[i]` links step `i` to step `i + 1`.
    pub matchings: Vec<Matching>,
}

impl TrajectorySet {
    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    /// Per step, the number of points of each kind, as
    /// `[harmonic, gradient, curl]`.
    pub fn kind_counts(&self) -> Vec<[usize; 3]> {
        let mut out = alloc::vec![[0; 3]; self.thresholds.len()];
        for p in self.trajectories.iter().flat_map(|t| &t.points) {
            out[p.step][p.kind as usize] += 1;
        }
        out
    }
}

/// Computes the spectrum at every grid step and chains them into
/// trajectories.
pub fn track(fc: &FilteredComplex, grid: &FiltrationGrid, opts: &TrackOptions) -> Result<TrajectorySet, PersistenceError> {
    let spectra = grid
        .thresholds()
        .iter()
        .enumerate()
        .map(|(step, &t)| step_spectrum(fc, t, opts).map_err(|source| PersistenceError::Step { step, t, source }))
        .collect::<Result<Vec<_>, _>>()?;
    link_spectra(fc, grid, &spectra, opts.theta)
}

/// The spectrum [`track`] computes at one threshold.
pub fn step_spectrum(fc: &FilteredComplex, t: f64, opts: &TrackOptions) -> Result<TypedSpectrum, SpectralError> {
    let slice = sublevel(fc, t);
    let ops = hodge_operators(&slice, opts.degree)?;
    spectrum_of(&ops, EigenCount::Smallest(opts.budget), &opts.tolerances)
}

/// Chains precomputed per-step spectra (one per grid threshold, in order)
/// into trajectories.
pub fn link_spectra(
    fc: &FilteredComplex,
    grid: &FiltrationGrid,
    spectra: &[TypedSpectrum],
    theta: f64,
) -> Result<TrajectorySet, PersistenceError> {
    let steps = grid.len();
    if spectra.len() != steps {
        return Err(PersistenceError::SpectrumCount {
            expected: steps,
            found: spectra.len(),
        });
    }
    let degree = spectra.first().map_or(0, |s| s.degree);
    let point = |step: usize, index: usize, pes_prev: Option<f64>| {
        let p = &spectra[step].pairs[index];
        TrajectoryPoint {
            step,
            index,
            lambda: p.lambda,
            kind: p.kind,
            pes_prev,
        }
    };
    let mut trajectories: Vec<Trajectory> = Vec::new();
    // owner[i]: trajectory holding pair i of the current step
    let mut owner: Vec<usize> = Vec::new();
    for index in 0..spectra[0].len() {
        owner.push(trajectories.len());
        trajectories.push(Trajectory {
            id: trajectories.len(),
            points: alloc::vec![point(0, index, None)],
            death: None,
        });
    }
    let mut matchings = Vec::with_capacity(steps.saturating_sub(1));
    for step in 1..steps {
        let small = sublevel(fc, grid.thresholds()[step - 1]);
        let large = sublevel(fc, grid.thresholds()[step]);
        let iota = inclusion_map(&small, &large, degree)?;
        let left: Vec<Vec<f64>> = spectra[step - 1].pairs.iter().map(|p| p.vector.clone()).collect();
        let right: Vec<Vec<f64>> = spectra[step].pairs.iter().map(|p| p.vector.clone()).collect();
        let matching = pem(&left, &right, &iota, theta)?;
        let mut next_owner = alloc::vec![usize::MAX; right.len()];
        for &(i, j, s) in &matching.pairs {
            let id = owner[i];
            trajectories[id].points.push(point(step, j, Some(s)));
            next_owner[j] = id;
        }
        for &i in &matching.unmatched_left {
            trajectories[owner[i]].death = Some(step - 1);
        }
        for &j in &matching.unmatched_right {
            next_owner[j] = trajectories.len();
            trajectories.push(Trajectory {
                id: trajectories.len(),
                points: alloc::vec![point(step, j, None)],
                death: None,
            });
        }
        owner = next_owner;
        matchings.push(matching);
    }
    Ok(TrajectorySet {
        degree,
        thresholds: grid.thresholds().to_vec(),
        trajectories,
        matchings,
    })
}
