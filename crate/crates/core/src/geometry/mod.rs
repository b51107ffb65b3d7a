//! Point clouds, planar Delaunay triangulation and circumradius filtrations.

mod delaunay;
mod predicates;

use alloc::vec::Vec;
use core::cmp::Ordering;

use thiserror::Error;

use crate::complex::{ComplexError, FilteredComplex, Simplex};

pub use delaunay::delaunay_2d;
pub use predicates::{incircle, orient2d, Predicates};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("unsupported point dimension {0} (expected 2 or 3)")]
    UnsupportedDimension(usize),
    #[error("point {index} has dimension {found}, expected {expected}")]
    MixedDimension {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("point {index} has a non-finite coordinate")]
    NonFinite { index: usize },
    #[error("points {first} and {second} are identical")]
    DuplicatePoint { first: usize, second: usize },
    #[error("need at least {needed} points, got {found}")]
    TooFewPoints { needed: usize, found: usize },
    #[error("all input points are collinear")]
    Collinear,
    #[error("operation requires {expected}D points, cloud is {found}D")]
    WrongDimension { expected: usize, found: usize },
    #[error("{0} affinely dependent vertices have no circumsphere")]
    Degenerate(usize),
    #[error("filtered complex rejected: {0}")]
    Complex(#[from] ComplexError),
}

/// Ordered points of one common dimension (2 or 3). Point ids are positions.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    /// Builds a cloud from flat, row-major coordinates.
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self, GeometryError> {
        if dim != 2 && dim != 3 {
            return Err(GeometryError::UnsupportedDimension(dim));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(GeometryError::MixedDimension {
                index: coords.len() / dim,
                expected: dim,
                found: coords.len() % dim,
            });
        }
        let cloud = Self { dim, coords };
        for i in 0..cloud.len() {
            if cloud.point(i).iter().any(|c| !c.is_finite()) {
                return Err(GeometryError::NonFinite { index: i });
            }
        }
        cloud.check_duplicates()?;
        Ok(cloud)
    }

    /// Builds a cloud from per-point rows; every row must have the length of
    /// the first one.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, GeometryError> {
        let dim = rows.first().map_or(2, |r| r.as_ref().len());
        if dim != 2 && dim != 3 {
            return Err(GeometryError::UnsupportedDimension(dim));
        }
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for (index, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(GeometryError::MixedDimension {
                    index,
                    expected: dim,
                    found: row.len(),
                });
            }
            coords.extend_from_slice(row);
        }
        Self::new(dim, coords)
    }

    fn check_duplicates(&self) -> Result<(), GeometryError> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.cmp_points(a, b).then(a.cmp(&b)));
        for w in order.windows(2) {
            if self.cmp_points(w[0], w[1]) == Ordering::Equal {
                let (first, second) = (w[0].min(w[1]), w[0].max(w[1]));
                return Err(GeometryError::DuplicatePoint { first, second });
            }
        }
        Ok(())
    }

    fn cmp_points(&self, a: usize, b: usize) -> Ordering {
        self.point(a)
            .iter()
            .zip(self.point(b))
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, id: usize) -> &[f64] {
        &self.coords[id * self.dim..(id + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

/// A planar triangulation: edges and triangles as ascending vertex-id tuples,
/// each list lexicographically sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation {
    pub points: PointCloud,
    pub edges: Vec<[u32; 2]>,
    pub triangles: Vec<[u32; 3]>,
}

impl Triangulation {
    pub fn vertex_count(&self) -> usize {
        self.points.len()
    }
}

/// Radius of the sphere through all given points inside their affine hull.
///
/// One point has radius 0 and two points give half their distance. Affinely
/// dependent input is rejected with [`GeometryError::Degenerate`].
pub fn circumradius(vertices: &[&[f64]]) -> Result<f64, GeometryError> {
    let k = match vertices.len() {
        0 => return Err(GeometryError::Degenerate(0)),
        1 => return Ok(0.0),
        n => n - 1,
    };
    let d = vertices[0].len();
    if vertices.iter().any(|v| v.len() != d) || k > d {
        return Err(GeometryError::Degenerate(k + 1));
    }
    let origin = vertices[0];
    let offsets: Vec<Vec<f64>> = vertices[1..]
        .iter()
        .map(|v| v.iter().zip(origin).map(|(a, b)| a - b).collect())
        .collect();
    // The circumcenter is origin + sum_i x_i * a_i with G x = diag(G) / 2,
    // G the Gram matrix of the offsets a_i.
    let mut gram = alloc::vec![0.0; k * k];
    let mut rhs = alloc::vec![0.0; k];
    for i in 0..k {
        for j in 0..k {
            gram[i * k + j] = dot(&offsets[i], &offsets[j]);
        }
        rhs[i] = 0.5 * gram[i * k + i];
    }
    let scale = (0..k).map(|i| gram[i * k + i]).fold(0.0, f64::max);
    let x = solve_small(&mut gram, &mut rhs, k, 1e-12 * scale)
        .ok_or(GeometryError::Degenerate(k + 1))?;
    let mut center = alloc::vec![0.0; d];
    for (xi, a) in x.iter().zip(&offsets) {
        for (c, ai) in center.iter_mut().zip(a) {
            *c += xi * ai;
        }
    }
    Ok(libm::sqrt(dot(&center, &center)))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// Gaussian elimination with partial pivoting; None when a pivot falls below
// `tiny`.
fn solve_small(a: &mut [f64], b: &mut [f64], n: usize, tiny: f64) -> Option<Vec<f64>> {
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))?;
        if a[piv * n + col].abs() <= tiny {
            return None;
        }
        if piv != col {
            for j in 0..n {
                a.swap(piv * n + j, col * n + j);
            }
            b.swap(piv, col);
        }
        for row in col + 1..n {
            let f = a[row * n + col] / a[col * n + col];
            for j in col..n {
                a[row * n + j] -= f * a[col * n + j];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = alloc::vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|j| a[row * n + j] * x[j]).sum();
        x[row] = (b[row] - s) / a[row * n + row];
    }
    Some(x)
}

/// Assigns every simplex of `tri` its circumradius, raised where needed so
/// that no simplex enters before its faces. Vertices enter at 0.
pub fn filtration_values(tri: &Triangulation) -> Result<FilteredComplex, GeometryError> {
    let pts = &tri.points;
    let mut simplices = Vec::with_capacity(pts.len() + tri.edges.len() + tri.triangles.len());
    for v in 0..pts.len() {
        simplices.push((Simplex::vertex(v as u32), 0.0));
    }
    let mut edge_value = alloc::collections::BTreeMap::new();
    for e in &tri.edges {
        let r = circumradius(&[pts.point(e[0] as usize), pts.point(e[1] as usize)])?;
        edge_value.insert(*e, r);
        simplices.push((Simplex::new_unchecked(e.to_vec()), r));
    }
    for t in &tri.triangles {
        let r = circumradius(&[
            pts.point(t[0] as usize),
            pts.point(t[1] as usize),
            pts.point(t[2] as usize),
        ])?;
        let faces = [[t[0], t[1]], [t[0], t[2]], [t[1], t[2]]];
        let face_max = faces
            .iter()
            .map(|f| edge_value.get(f).copied().unwrap_or(0.0))
            .fold(0.0, f64::max);
        simplices.push((Simplex::new_unchecked(t.to_vec()), r.max(face_max)));
    }
    Ok(FilteredComplex::new(simplices)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn circumradius_of_edge_is_half_length() {
        let r = circumradius(&[&[0.0, 0.0], &[2.0, 0.0]]).unwrap();
        assert!((r - 1.0).abs() < 1e-15);
    }

    #[test]
    fn circumradius_matches_abc_over_four_area() {
        // a = b = 1, c = sqrt 2, area 1/2
        let r = circumradius(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]).unwrap();
        let expected = 1.0 * 1.0 * libm::sqrt(2.0) / (4.0 * 0.5);
        assert!((r - expected).abs() < 1e-12);

        let h = libm::sqrt(3.0) / 2.0;
        let r = circumradius(&[&[0.0, 0.0], &[1.0, 0.0], &[0.5, h]]).unwrap();
        let expected = 1.0 / (4.0 * (h / 2.0));
        assert!((r - expected).abs() < 1e-12);
        assert!((r - 0.577_350_27).abs() < 1e-8);
    }

    #[test]
    fn circumradius_in_three_dimensions() {
        // regular tetrahedron with edge sqrt(8): R = sqrt(6)/4 * edge = sqrt(3)
        let pts: [&[f64]; 4] = [
            &[1.0, 1.0, 1.0],
            &[1.0, -1.0, -1.0],
            &[-1.0, 1.0, -1.0],
            &[-1.0, -1.0, 1.0],
        ];
        let r = circumradius(&pts).unwrap();
        assert!((r - libm::sqrt(3.0)).abs() < 1e-12);
        // a triangle living in 3D
        let r = circumradius(&[&[0.0, 0.0, 5.0], &[1.0, 0.0, 5.0], &[0.0, 1.0, 5.0]]).unwrap();
        assert!((r - libm::sqrt(0.5)).abs() < 1e-12);
    }

    #[test]
    fn collinear_triangle_is_degenerate() {
        let err = circumradius(&[&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0]]).unwrap_err();
        assert_eq!(err, GeometryError::Degenerate(3));
    }

    #[test]
    fn cloud_rejects_duplicates_and_mixed_rows() {
        let err = PointCloud::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 0.0]])
            .unwrap_err();
        assert_eq!(err, GeometryError::DuplicatePoint { first: 0, second: 2 });
        let err = PointCloud::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0, 2.0]]).unwrap_err();
        assert!(matches!(err, GeometryError::MixedDimension { index: 1, .. }));
        assert!(matches!(
            PointCloud::from_rows(&[vec![0.0; 4]]),
            Err(GeometryError::UnsupportedDimension(4))
        ));
    }

    #[test]
    fn single_edge_filtration() {
        let points = PointCloud::from_rows(&[[0.0, 0.0], [2.0, 0.0]]).unwrap();
        let tri = Triangulation {
            points,
            edges: vec![[0, 1]],
            triangles: vec![],
        };
        let fc = filtration_values(&tri).unwrap();
        assert_eq!(fc.value(0, 0), 0.0);
        assert_eq!(fc.value(0, 1), 0.0);
        assert!((fc.value(1, 0) - 1.0).abs() < 1e-15);
    }
}
