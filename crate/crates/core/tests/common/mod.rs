#![allow(dead_code)]

use hodgetrack_core::{PointCloud, SparseSignMatrix, Triangulation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` points uniform in the unit square.
pub fn random_cloud(seed: u64, n: usize) -> PointCloud {
    let mut r = rng(seed);
    let rows: Vec<[f64; 2]> = (0..n).map(|_| [r.random(), r.random()]).collect();
    PointCloud::from_rows(&rows).unwrap()
}

pub fn dense(b: &SparseSignMatrix) -> Vec<Vec<i64>> {
    let mut m = vec![vec![0i64; b.ncols()]; b.nrows()];
    for (r, c, s) in b.triplets() {
        m[r][c] = s as i64;
    }
    m
}

/// Rank by fraction-free (Bareiss) elimination in exact integers.
pub fn integer_rank(mut m: Vec<Vec<i64>>) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut a: Vec<Vec<i128>> = m.drain(..).map(|r| r.into_iter().map(i128::from).collect()).collect();
    let mut rank = 0;
    let mut prev = 1i128;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| a[r][c] != 0) else { continue };
        a.swap(rank, p);
        for r in rank + 1..rows {
            for k in c + 1..cols {
                a[r][k] = (a[rank][c] * a[r][k] - a[r][c] * a[rank][k]) / prev;
            }
            a[r][c] = 0;
        }
        prev = a[rank][c];
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Number of (triangle, point) pairs with the point strictly inside the
/// circumcircle, by direct determinant evaluation.
pub fn incircle_violations(tri: &Triangulation) -> usize {
    let pts = &tri.points;
    let mut bad = 0;
    for t in &tri.triangles {
        let [a, b, c] = t.map(|v| pts.point(v as usize));
        let orient = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
        for (i, d) in pts.points().enumerate() {
            if t.contains(&(i as u32)) {
                continue;
            }
            let row = |p: &[f64]| {
                let (x, y) = (p[0] - d[0], p[1] - d[1]);
                [x, y, x * x + y * y]
            };
            let (ra, rb, rc) = (row(a), row(b), row(c));
            let det = ra[0] * (rb[1] * rc[2] - rb[2] * rc[1]) - ra[1] * (rb[0] * rc[2] - rb[2] * rc[0])
                + ra[2] * (rb[0] * rc[1] - rb[1] * rc[0]);
            let scale = [ra, rb, rc].iter().map(|r| r[2]).fold(0.0f64, f64::max).powi(2);
            if det * orient.signum() > 1e-10 * scale.max(1e-300) {
                bad += 1;
            }
        }
    }
    bad
}
