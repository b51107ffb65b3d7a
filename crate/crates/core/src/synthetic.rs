//! Deterministic synthetic point clouds with ground-truth labels.
//!
//! Every generator draws from `ChaCha8Rng::seed_from_u64(seed)`, so a preset,
//! a size and a seed pin the output down completely.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{GeometryError, PointCloud};

/// Radius of every disk in the disk presets.
pub const DISK_RADIUS: f64 = 1.0;

/// Center distance between neighbouring disks, in disk radii.
pub const DISK_SPACING: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Four disks on the corners of a square.
    FourDisks,
    /// A ring with inner radius 1 and outer radius 2.
    Annulus,
    /// Two disks side by side.
    TwoClusters,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::FourDisks => "four-disks",
            Preset::Annulus => "annulus",
            Preset::TwoClusters => "two-clusters",
        }
    }
}

impl core::str::FromStr for Preset {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "four-disks" => Ok(Preset::FourDisks),
            "annulus" => Ok(Preset::Annulus),
            "two-clusters" => Ok(Preset::TwoClusters),
            _ => Err(()),
        }
    }
}

/// Points plus the index of the component each point was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub cloud: PointCloud,
    pub labels: Vec<usize>,
    /// Centers of the components (one entry for the annulus).
    pub centers: Vec<[f64; 2]>,
}

pub fn generate(preset: Preset, n: usize, seed: u64) -> Result<Sample, GeometryError> {
    match preset {
        Preset::FourDisks => four_disks(n, seed),
        Preset::Annulus => annulus(n, seed),
        Preset::TwoClusters => two_clusters(n, seed),
    }
}

/// `n` points split evenly over four unit disks centered on the corners of
/// a square of side `DISK_SPACING · DISK_RADIUS`; the first `n mod 4` disks
/// get one extra point.
pub fn four_disks(n: usize, seed: u64) -> Result<Sample, GeometryError> {
    let s = DISK_SPACING * DISK_RADIUS / 2.0;
    disks(&[[-s, -s], [s, -s], [-s, s], [s, s]], n, seed)
}

/// Two unit disks at distance `DISK_SPACING · DISK_RADIUS`.
pub fn two_clusters(n: usize, seed: u64) -> Result<Sample, GeometryError> {
    let s = DISK_SPACING * DISK_RADIUS / 2.0;
    disks(&[[-s, 0.0], [s, 0.0]], n, seed)
}

/// `n` points uniform (by area) in the ring `1 ≤ |p| ≤ 2`.
pub fn annulus(n: usize, seed: u64) -> Result<Sample, GeometryError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (inner, outer) = (1.0f64, 2.0f64);
    let mut coords = Vec::with_capacity(2 * n);
    for _ in 0..n {
        let u: f64 = rng.random();
        let r = libm::sqrt(inner * inner + u * (outer * outer - inner * inner));
        let a = 2.0 * PI * rng.random::<f64>();
        coords.push(r * libm::cos(a));
        coords.push(r * libm::sin(a));
    }
    Ok(Sample {
        cloud: PointCloud::new(2, coords)?,
        labels: alloc::vec![0; n],
        centers: alloc::vec![[0.0, 0.0]],
    })
}

fn disks(centers: &[[f64; 2]], n: usize, seed: u64) -> Result<Sample, GeometryError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    let per = n / centers.len();
    let extra = n % centers.len();
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..per + usize::from(c < extra) {
            let r = DISK_RADIUS * libm::sqrt(rng.random::<f64>());
            let a = 2.0 * PI * rng.random::<f64>();
            coords.push(center[0] + r * libm::cos(a));
            coords.push(center[1] + r * libm::sin(a));
            labels.push(c);
        }
    }
    Ok(Sample {
        cloud: PointCloud::new(2, coords)?,
        labels,
        centers: centers.to_vec(),
    })
}
