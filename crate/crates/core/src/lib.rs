//! Hodge Laplacian spectra on filtered simplicial complexes.
//!
//! The crate builds alpha-style filtrations on planar point clouds, splits the
//! spectrum of the k-th Hodge Laplacian into harmonic, gradient and curl
//! eigenpairs, follows individual eigenvectors through the filtration and
//! offers two downstream analyses: Hodge spectral clustering of k-simplices and
//! per-simplex harmonic/gradient/curl relevance scores.
//!
//! The pipeline is split into modules that mirror its stages:
//!
//! * [`geometry`]: point clouds, 2D Delaunay triangulation, circumradii and
//!   filtration values.
//! * [`complex`]: filtered complexes, sublevel slices, boundary matrices and
//!   inclusion maps between slices.
//! * [`spectral`]: Hodge operators, eigensolves and eigenpair typing.
//! * [`persistence`]: eigenvector similarity across filtration steps, mutual
//!   best matching and eigenvalue trajectories.
//! * [`analysis`]: k-means, Hodge spectral clustering and HGC values.
//! * [`synthetic`]: deterministic point-cloud generators.
//!
//! The crate is `no_std` and only needs an allocator. File formats, rendering
//! and the command line live in the `hodgetrack` companion crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod complex;
pub mod geometry;
pub mod linalg;
pub mod persistence;
pub mod spectral;
pub mod synthetic;

pub use analysis::{
    hgc_values, hodge_spectral_clustering, kmeans, node_clustering, AnalysisError,
    ClusterAssignment, EigenMode, HgcTriple, KMeansResult,
};
pub use complex::{
    boundary_matrix, inclusion_map, sublevel, ComplexError, ComplexSlice, FilteredComplex,
    InclusionMap, Simplex, SparseSignMatrix,
};
pub use geometry::{
    circumradius, delaunay_2d, filtration_values, GeometryError, PointCloud, Triangulation,
};
pub use persistence::{
    pem, pes, track, FiltrationGrid, Matching, PersistenceError, TrackOptions, Trajectory,
    TrajectorySet,
};
pub use spectral::{
    classify, eigendecompose, hodge_operators, hodge_project, spectrum_at, EigenCount, EigenKind,
    HodgeComponents, HodgeOperators, SpectralError, Tolerances, TypedEigenpair, TypedSpectrum,
};
