//! Filtered simplicial complexes, sublevel slices and inclusion maps.
//!
//! Every simplex is stored as a strictly ascending vertex tuple, which fixes
//! its orientation. Simplices of one dimension are kept in lexicographic
//! order and that order is the row/column order of all matrices built from a
//! complex or one of its slices.

mod boundary;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

pub use boundary::{boundary_matrix, SparseSignMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ComplexError {
    #[error("simplex {0:?} is not strictly ascending")]
    NotAscending(Vec<u32>),
    #[error("empty simplex")]
    EmptySimplex,
    #[error("simplex {0} listed twice")]
    Duplicate(Simplex),
    #[error("simplex {simplex} has invalid filtration value {value}")]
    InvalidValue { simplex: Simplex, value: f64 },
    #[error("simplex {simplex} is missing its face {face}")]
    MissingFace { simplex: Simplex, face: Simplex },
    #[error("face {face} (value {face_value}) enters after its coface {simplex} (value {value})")]
    NonMonotone {
        face: Simplex,
        face_value: f64,
        simplex: Simplex,
        value: f64,
    },
    #[error("dimension {k} out of range (complex dimension {max})")]
    Dimension { k: usize, max: usize },
    #[error("slices belong to different complexes")]
    Lineage,
    #[error("simplex {0} of the smaller slice is absent from the larger one")]
    NotNested(Simplex),
}

/// A simplex as a strictly ascending list of vertex ids.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Simplex(Vec<u32>);

impl Simplex {
    pub fn new(vertices: Vec<u32>) -> Result<Self, ComplexError> {
        if vertices.is_empty() {
            return Err(ComplexError::EmptySimplex);
        }
        if vertices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ComplexError::NotAscending(vertices));
        }
        Ok(Self(vertices))
    }

    pub(crate) fn new_unchecked(vertices: Vec<u32>) -> Self {
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        Self(vertices)
    }

    pub fn vertex(v: u32) -> Self {
        Self(alloc::vec![v])
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn vertices(&self) -> &[u32] {
        &self.0
    }

    /// Face obtained by dropping vertex `i`; appears in the boundary with sign
    /// `(-1)^i`.
    pub fn face(&self, i: usize) -> Simplex {
        let mut v = self.0.clone();
        v.remove(i);
        Self(v)
    }

    pub fn contains_vertex(&self, v: u32) -> bool {
        self.0.binary_search(&v).is_ok()
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Simplices of all dimensions with monotone filtration values.
#[derive(Debug, Clone)]
pub struct FilteredComplex {
    simplices: Vec<Vec<Simplex>>,
    values: Vec<Vec<f64>>,
    // faces[k][j * (k + 1) + i]: index of face i of simplex j in dimension k - 1
    faces: Vec<Vec<usize>>,
    index: Vec<BTreeMap<Simplex, usize>>,
}

impl FilteredComplex {
    /// Validates and sorts a list of simplices with their values.
    ///
    /// Closure under faces, monotonicity and uniqueness are checked; nothing
    /// is repaired.
    pub fn new(entries: Vec<(Simplex, f64)>) -> Result<Self, ComplexError> {
        let top = entries.iter().map(|(s, _)| s.dim()).max();
        let Some(top) = top else {
            return Ok(Self {
                simplices: alloc::vec![Vec::new()],
                values: alloc::vec![Vec::new()],
                faces: alloc::vec![Vec::new()],
                index: alloc::vec![BTreeMap::new()],
            });
        };
        let mut by_dim: Vec<Vec<(Simplex, f64)>> = (0..=top).map(|_| Vec::new()).collect();
        for (s, v) in entries {
            if !v.is_finite() || v < 0.0 {
                return Err(ComplexError::InvalidValue { simplex: s, value: v });
            }
            by_dim[s.dim()].push((s, v));
        }
        let mut simplices = Vec::with_capacity(top + 1);
        let mut values = Vec::with_capacity(top + 1);
        let mut index = Vec::with_capacity(top + 1);
        for mut list in by_dim {
            list.sort_by(|a, b| a.0.cmp(&b.0));
            if let Some(w) = list.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(ComplexError::Duplicate(w[0].0.clone()));
            }
            let map: BTreeMap<Simplex, usize> =
                list.iter().enumerate().map(|(i, (s, _))| (s.clone(), i)).collect();
            let (s, v): (Vec<_>, Vec<_>) = list.into_iter().unzip();
            simplices.push(s);
            values.push(v);
            index.push(map);
        }
        let mut faces = alloc::vec![Vec::new()];
        for k in 1..=top {
            let mut f = Vec::with_capacity(simplices[k].len() * (k + 1));
            for (j, s) in simplices[k].iter().enumerate() {
                for i in 0..=k {
                    let face = s.face(i);
                    let Some(&fi) = index[k - 1].get(&face) else {
                        return Err(ComplexError::MissingFace {
                            simplex: s.clone(),
                            face,
                        });
                    };
                    if values[k - 1][fi] > values[k][j] {
                        return Err(ComplexError::NonMonotone {
                            face,
                            face_value: values[k - 1][fi],
                            simplex: s.clone(),
                            value: values[k][j],
                        });
                    }
                    f.push(fi);
                }
            }
            faces.push(f);
        }
        Ok(Self {
            simplices,
            values,
            faces,
            index,
        })
    }

    /// Like [`FilteredComplex::new`], but when the input lists no 0-simplex at
    /// all, every vertex used by some simplex is added with value 0.
    pub fn with_implied_vertices(mut entries: Vec<(Simplex, f64)>) -> Result<Self, ComplexError> {
        if !entries.iter().any(|(s, _)| s.dim() == 0) {
            let mut verts: Vec<u32> =
                entries.iter().flat_map(|(s, _)| s.vertices().iter().copied()).collect();
            verts.sort_unstable();
            verts.dedup();
            entries.extend(verts.into_iter().map(|v| (Simplex::vertex(v), 0.0)));
        }
        Self::new(entries)
    }

    /// Highest simplex dimension present.
    pub fn dimension(&self) -> usize {
        self.simplices.len() - 1
    }

    pub fn len(&self, k: usize) -> usize {
        self.simplices.get(k).map_or(0, Vec::len)
    }

    pub fn total_len(&self) -> usize {
        self.simplices.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total_len() == 0
    }

    pub fn simplices(&self, k: usize) -> &[Simplex] {
        self.simplices.get(k).map_or(&[], Vec::as_slice)
    }

    pub fn simplex(&self, k: usize, i: usize) -> &Simplex {
        &self.simplices[k][i]
    }

    pub fn values(&self, k: usize) -> &[f64] {
        self.values.get(k).map_or(&[], Vec::as_slice)
    }

    pub fn value(&self, k: usize, i: usize) -> f64 {
        self.values[k][i]
    }

    /// Indices (in dimension `k - 1`) of the faces of simplex `i` of dimension
    /// `k`, face `j` being the one without vertex `j`.
    pub fn face_indices(&self, k: usize, i: usize) -> &[usize] {
        &self.faces[k][i * (k + 1)..(i + 1) * (k + 1)]
    }

    pub fn find(&self, simplex: &Simplex) -> Option<usize> {
        self.index.get(simplex.dim())?.get(simplex).copied()
    }

    /// Iterates `(simplex, value)` over all dimensions, lowest first.
    pub fn iter(&self) -> impl Iterator<Item = (&Simplex, f64)> {
        self.simplices
            .iter()
            .zip(&self.values)
            .flat_map(|(s, v)| s.iter().zip(v.iter().copied()))
    }

    /// Sorted distinct filtration values.
    pub fn distinct_values(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self.values.iter().flatten().copied().collect();
        all.sort_by(f64::total_cmp);
        all.dedup();
        all
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().flatten().copied().fold(0.0, f64::max)
    }
}

/// The sublevel set `{σ : f(σ) <= t}` of a filtered complex.
#[derive(Debug, Clone)]
pub struct ComplexSlice<'a> {
    parent: &'a FilteredComplex,
    threshold: f64,
    // ascending parent indices per dimension
    members: Vec<Vec<usize>>,
}

/// Sublevel slice at threshold `t`.
pub fn sublevel(fc: &FilteredComplex, t: f64) -> ComplexSlice<'_> {
    let members = (0..=fc.dimension())
        .map(|k| {
            fc.values(k)
                .iter()
                .enumerate()
                .filter(|(_, &v)| v <= t)
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    ComplexSlice {
        parent: fc,
        threshold: t,
        members,
    }
}

impl<'a> ComplexSlice<'a> {
    pub fn parent(&self) -> &'a FilteredComplex {
        self.parent
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Dimension bound of the parent complex.
    pub fn dimension(&self) -> usize {
        self.parent.dimension()
    }

    pub fn len(&self, k: usize) -> usize {
        self.members.get(k).map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.members.iter().all(Vec::is_empty)
    }

    /// Parent indices of the k-simplices in the slice, ascending.
    pub fn members(&self, k: usize) -> &[usize] {
        self.members.get(k).map_or(&[], Vec::as_slice)
    }

    pub fn simplex(&self, k: usize, local: usize) -> &'a Simplex {
        self.parent.simplex(k, self.members[k][local])
    }

    pub fn simplices(&self, k: usize) -> impl ExactSizeIterator<Item = &'a Simplex> + '_ {
        let parent = self.parent;
        self.members(k).iter().map(move |&i| parent.simplex(k, i))
    }

    /// Slice-local index of parent simplex `parent_index` of dimension `k`.
    pub fn local_index(&self, k: usize, parent_index: usize) -> Option<usize> {
        self.members.get(k)?.binary_search(&parent_index).ok()
    }

    /// Vertex ids of the slice, ascending.
    pub fn vertex_ids(&self) -> Vec<u32> {
        self.simplices(0).map(|s| s.vertices()[0]).collect()
    }
}

/// Index map realizing the inclusion of k-signals of a smaller slice into a
/// larger one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InclusionMap {
    map: Vec<usize>,
    target_len: usize,
}

impl InclusionMap {
    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
            target_len: n,
        }
    }

    pub fn from_parts(map: Vec<usize>, target_len: usize) -> Self {
        debug_assert!(map.iter().all(|&j| j < target_len));
        Self { map, target_len }
    }

    pub fn source_len(&self) -> usize {
        self.map.len()
    }

    pub fn target_len(&self) -> usize {
        self.target_len
    }

    pub fn get(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    /// Zero-padded image of a signal on the source simplices.
    pub fn extend(&self, v: &[f64]) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.target_len];
        for (&j, &x) in self.map.iter().zip(v) {
            out[j] = x;
        }
        out
    }

    /// `then ∘ self`.
    pub fn compose(&self, then: &InclusionMap) -> InclusionMap {
        InclusionMap {
            map: self.map.iter().map(|&j| then.map[j]).collect(),
            target_len: then.target_len,
        }
    }
}

/// Inclusion of the k-simplices of `small` into those of `large`.
pub fn inclusion_map(
    small: &ComplexSlice<'_>,
    large: &ComplexSlice<'_>,
    k: usize,
) -> Result<InclusionMap, ComplexError> {
    if !core::ptr::eq(small.parent, large.parent) {
        return Err(ComplexError::Lineage);
    }
    let map = small
        .members(k)
        .iter()
        .map(|&p| {
            large
                .local_index(k, p)
                .ok_or_else(|| ComplexError::NotNested(small.parent.simplex(k, p).clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(InclusionMap {
        map,
        target_len: large.len(k),
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use alloc::vec;

    fn s(v: &[u32]) -> Simplex {
        Simplex::new(v.to_vec()).unwrap()
    }

    pub(crate) fn complex(entries: &[(&[u32], f64)]) -> FilteredComplex {
        FilteredComplex::with_implied_vertices(entries.iter().map(|(v, f)| (s(v), *f)).collect())
            .unwrap()
    }

    #[test]
    fn import_style_validation() {
        let fc = FilteredComplex::new(vec![(s(&[0]), 0.0), (s(&[1]), 0.0), (s(&[0, 1]), 1.5)])
            .unwrap();
        assert_eq!(fc.dimension(), 1);
        assert_eq!(fc.len(1), 1);

        let err = FilteredComplex::new(vec![(s(&[0]), 0.0), (s(&[0, 1]), 1.0)]).unwrap_err();
        assert_eq!(
            err,
            ComplexError::MissingFace {
                simplex: s(&[0, 1]),
                face: s(&[1])
            }
        );

        let err = FilteredComplex::with_implied_vertices(vec![
            (s(&[0, 1]), 2.0),
            (s(&[0, 2]), 0.5),
            (s(&[1, 2]), 0.5),
            (s(&[0, 1, 2]), 1.0),
        ])
        .unwrap_err();
        assert!(matches!(err, ComplexError::NonMonotone { ref face, .. } if *face == s(&[0, 1])));

        assert!(matches!(Simplex::new(vec![2, 1]), Err(ComplexError::NotAscending(_))));
        let err =
            FilteredComplex::new(vec![(s(&[0]), 0.0), (s(&[0]), 0.0)]).unwrap_err();
        assert_eq!(err, ComplexError::Duplicate(s(&[0])));
    }

    #[test]
    fn implied_vertices_only_when_none_listed() {
        let fc = complex(&[(&[0, 1], 1.0)]);
        assert_eq!(fc.len(0), 2);
        assert_eq!(fc.values(0), &[0.0, 0.0]);
    }

    #[test]
    fn sublevel_extremes_and_plateaus() {
        let fc = complex(&[(&[0, 1], 1.0), (&[1, 2], 2.0), (&[0, 2], 3.0), (&[0, 1, 2], 3.5)]);
        let zero = sublevel(&fc, 0.0);
        assert_eq!((zero.len(0), zero.len(1), zero.len(2)), (3, 0, 0));
        let all = sublevel(&fc, f64::INFINITY);
        assert_eq!((all.len(0), all.len(1), all.len(2)), (3, 3, 1));
        let a = sublevel(&fc, 1.1);
        for t in [1.5, 1.9, 1.999] {
            let b = sublevel(&fc, t);
            for k in 0..=2 {
                assert_eq!(a.members(k), b.members(k));
            }
        }
    }

    #[test]
    fn inclusion_maps_compose() {
        let fc = complex(&[(&[0, 1], 1.0), (&[1, 2], 2.0), (&[0, 2], 3.0), (&[2, 3], 0.5)]);
        let s1 = sublevel(&fc, 1.0);
        let s2 = sublevel(&fc, 2.0);
        let s3 = sublevel(&fc, 3.0);
        let i12 = inclusion_map(&s1, &s2, 1).unwrap();
        let i23 = inclusion_map(&s2, &s3, 1).unwrap();
        let i13 = inclusion_map(&s1, &s3, 1).unwrap();
        assert_eq!(i12.compose(&i23), i13);
        assert_eq!(inclusion_map(&s2, &s2, 1).unwrap(), InclusionMap::identity(s2.len(1)));
        for (i, &j) in i13.as_slice().iter().enumerate() {
            assert_eq!(s1.simplex(1, i), s3.simplex(1, j));
        }
        assert!(matches!(inclusion_map(&s3, &s1, 1), Err(ComplexError::NotNested(_))));

        let other = fc.clone();
        let foreign = sublevel(&other, 3.0);
        assert_eq!(inclusion_map(&s1, &foreign, 1), Err(ComplexError::Lineage));
    }
}
