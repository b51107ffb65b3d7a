//! Incremental Bowyer-Watson triangulation with ghost triangles.
//!
//! Hull edges are closed off by ghost triangles `(a, b, GHOST)` whose
//! "circumcircle" is the open half-plane left of `a -> b`. Points outside the
//! current hull therefore conflict with ghosts and no super-triangle is
//! needed.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::predicates::Predicates;
use super::{GeometryError, PointCloud, Triangulation};

const GHOST: u32 = u32::MAX;
const NONE: usize = usize::MAX;

#[derive(Debug, Clone, Copy)]
struct Tri {
    v: [u32; 3],
    // n[i] is the triangle across the edge opposite v[i]
    n: [usize; 3],
    alive: bool,
}

impl Tri {
    fn is_ghost(&self) -> bool {
        self.v[2] == GHOST
    }
}

struct Mesh<'a> {
    pts: &'a PointCloud,
    pred: Predicates,
    tris: Vec<Tri>,
    free: Vec<usize>,
    last: usize,
    stamp: Vec<u32>,
    epoch: u32,
}

/// Delaunay triangulation of a planar point cloud.
///
/// Points are inserted in id order. Cocircular configurations are resolved
/// by symbolic perturbation so that the output is deterministic; for four
/// cocircular points the diagonal through the smallest id is kept.
pub fn delaunay_2d(cloud: &PointCloud) -> Result<Triangulation, GeometryError> {
    if cloud.dim() != 2 {
        return Err(GeometryError::WrongDimension {
            expected: 2,
            found: cloud.dim(),
        });
    }
    if cloud.len() < 3 {
        return Err(GeometryError::TooFewPoints {
            needed: 3,
            found: cloud.len(),
        });
    }
    let scale = extent(cloud);
    let pred = Predicates::new(scale);

    let (a, b) = (0u32, 1u32);
    let c = (2..cloud.len())
        .find(|&i| pred.orient(cloud.point(0), cloud.point(1), cloud.point(i)) != 0)
        .ok_or(GeometryError::Collinear)? as u32;

    let mut mesh = Mesh {
        pts: cloud,
        pred,
        tris: Vec::with_capacity(4 * cloud.len()),
        free: Vec::new(),
        last: 0,
        stamp: Vec::new(),
        epoch: 0,
    };
    mesh.seed(a, b, c);
    for p in 2..cloud.len() as u32 {
        if p != c {
            mesh.insert(p);
        }
    }
    Ok(mesh.finish())
}

fn extent(cloud: &PointCloud) -> f64 {
    let mut ext: f64 = 0.0;
    for axis in 0..cloud.dim() {
        let (lo, hi) = cloud.points().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p[axis]), hi.max(p[axis]))
        });
        ext = ext.max(hi - lo);
    }
    ext
}

impl Mesh<'_> {
    fn p(&self, id: u32) -> &[f64] {
        self.pts.point(id as usize)
    }

    fn alloc(&mut self, tri: Tri) -> usize {
        if let Some(slot) = self.free.pop() {
            self.tris[slot] = tri;
            slot
        } else {
            self.tris.push(tri);
            self.stamp.push(0);
            self.tris.len() - 1
        }
    }

    fn seed(&mut self, a: u32, b: u32, c: u32) {
        let (b, c) = if self.pred.orient(self.p(a), self.p(b), self.p(c)) > 0 {
            (b, c)
        } else {
            (c, b)
        };
        let mk = |v: [u32; 3]| Tri {
            v,
            n: [NONE; 3],
            alive: true,
        };
        let t0 = self.alloc(mk([a, b, c]));
        // ghost across edge opposite v[i] of t0
        let g_bc = self.alloc(mk([c, b, GHOST]));
        let g_ca = self.alloc(mk([a, c, GHOST]));
        let g_ab = self.alloc(mk([b, a, GHOST]));
        let all = [t0, g_bc, g_ca, g_ab];
        self.link_all(&all);
        self.last = t0;
    }

    // Connects the listed triangles wherever they share an edge.
    fn link_all(&mut self, ids: &[usize]) {
        let mut open: BTreeMap<(u32, u32), (usize, usize)> = BTreeMap::new();
        for &t in ids {
            for i in 0..3 {
                let u = self.tris[t].v[(i + 1) % 3];
                let w = self.tris[t].v[(i + 2) % 3];
                if let Some((o, j)) = open.remove(&(w, u)) {
                    self.tris[t].n[i] = o;
                    self.tris[o].n[j] = t;
                } else {
                    open.insert((u, w), (t, i));
                }
            }
        }
    }

    fn in_conflict(&self, t: usize, p: u32) -> bool {
        let tri = &self.tris[t];
        let pp = self.p(p);
        if tri.is_ghost() {
            let (a, b) = (tri.v[0], tri.v[1]);
            match self.pred.orient(self.p(a), self.p(b), pp) {
                1 => true,
                -1 => false,
                _ => {
                    // On the hull line: conflict exactly when the real triangle
                    // behind the hull edge would be destroyed.
                    let inner = tri.n[2];
                    !self.tris[inner].is_ghost() && self.real_conflict(inner, p)
                }
            }
        } else {
            self.real_conflict(t, p)
        }
    }

    fn real_conflict(&self, t: usize, p: u32) -> bool {
        let [a, b, c] = self.tris[t].v;
        self.pred
            .in_circle([(self.p(a), a), (self.p(b), b), (self.p(c), c), (self.p(p), p)])
    }

    fn locate(&self, p: u32) -> Option<usize> {
        let pp = self.p(p);
        let mut t = self.last;
        let limit = 4 * self.tris.len() + 16;
        // rotate the first tested edge to avoid cycling on degenerate input
        let mut rot = 0usize;
        'walk: for _ in 0..limit {
            let tri = self.tris[t];
            if tri.is_ghost() {
                return Some(t);
            }
            rot = (rot + 1) % 3;
            for k in 0..3 {
                let i = (k + rot) % 3;
                let a = tri.v[(i + 1) % 3];
                let b = tri.v[(i + 2) % 3];
                if self.pred.orient(self.p(a), self.p(b), pp) < 0 {
                    t = tri.n[i];
                    continue 'walk;
                }
            }
            return Some(t);
        }
        None
    }

    fn insert(&mut self, p: u32) {
        let start = match self.locate(p) {
            Some(t) if self.in_conflict(t, p) => t,
            _ => match (0..self.tris.len()).find(|&t| self.tris[t].alive && self.in_conflict(t, p)) {
                Some(t) => t,
                None => {
                    log::warn!("point {p} conflicts with no triangle; skipped");
                    return;
                }
            },
        };

        self.epoch += 1;
        let epoch = self.epoch;
        let mut cavity = alloc::vec![start];
        self.stamp[start] = epoch;
        let mut boundary: Vec<(usize, usize)> = Vec::new();
        let mut head = 0;
        while head < cavity.len() {
            let t = cavity[head];
            head += 1;
            for i in 0..3 {
                let nb = self.tris[t].n[i];
                if self.stamp[nb] == epoch {
                    continue;
                }
                if self.in_conflict(nb, p) {
                    self.stamp[nb] = epoch;
                    cavity.push(nb);
                }
            }
        }
        for &t in &cavity {
            for i in 0..3 {
                let nb = self.tris[t].n[i];
                if self.stamp[nb] != epoch {
                    boundary.push((t, i));
                }
            }
        }

        let mut created = Vec::with_capacity(boundary.len());
        for &(t, i) in &boundary {
            let u = self.tris[t].v[(i + 1) % 3];
            let w = self.tris[t].v[(i + 2) % 3];
            let outer = self.tris[t].n[i];
            let back = self.tris[outer].n.iter().position(|&x| x == t);
            // (u, w, p) with the outer neighbour opposite p; ghosts keep GHOST last
            let (v, n) = if u == GHOST {
                ([w, p, u], [NONE, outer, NONE])
            } else if w == GHOST {
                ([p, u, w], [outer, NONE, NONE])
            } else {
                ([u, w, p], [NONE, NONE, outer])
            };
            created.push((v, n, outer, back));
        }
        for &t in &cavity {
            self.tris[t].alive = false;
            self.free.push(t);
        }
        let mut ids = Vec::with_capacity(created.len());
        for (v, n, outer, back) in created {
            let id = self.alloc(Tri { v, n, alive: true });
            if let Some(j) = back {
                self.tris[outer].n[j] = id;
            }
            ids.push(id);
        }
        self.link_new(&ids, p);
        if let Some(&real) = ids.iter().find(|&&t| !self.tris[t].is_ghost()) {
            self.last = real;
        }
    }

    // Links the fan of new triangles around p through their edges incident to p.
    fn link_new(&mut self, ids: &[usize], p: u32) {
        let mut open: BTreeMap<(u32, u32), (usize, usize)> = BTreeMap::new();
        for &t in ids {
            for i in 0..3 {
                let u = self.tris[t].v[(i + 1) % 3];
                let w = self.tris[t].v[(i + 2) % 3];
                if u != p && w != p {
                    continue;
                }
                if let Some((o, j)) = open.remove(&(w, u)) {
                    self.tris[t].n[i] = o;
                    self.tris[o].n[j] = t;
                } else {
                    open.insert((u, w), (t, i));
                }
            }
        }
        debug_assert!(open.is_empty(), "cavity boundary is not a closed fan");
    }

    fn finish(self) -> Triangulation {
        let mut triangles = Vec::new();
        let mut edges = Vec::new();
        for tri in self.tris.iter().filter(|t| t.alive && !t.is_ghost()) {
            let mut v = tri.v;
            v.sort_unstable();
            triangles.push(v);
            edges.extend([[v[0], v[1]], [v[0], v[2]], [v[1], v[2]]]);
        }
        triangles.sort_unstable();
        edges.sort_unstable();
        edges.dedup();
        Triangulation {
            points: self.pts.clone(),
            edges,
            triangles,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::incircle;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cloud(rows: &[[f64; 2]]) -> PointCloud {
        PointCloud::from_rows(rows).unwrap()
    }

    // Brute force: no input point strictly inside any triangle's circumcircle.
    fn violations(tri: &Triangulation) -> usize {
        let pts = &tri.points;
        let mut bad = 0;
        for t in &tri.triangles {
            let (mut a, b, mut c) = (
                pts.point(t[0] as usize),
                pts.point(t[1] as usize),
                pts.point(t[2] as usize),
            );
            if super::super::orient2d(a, b, c) < 0.0 {
                core::mem::swap(&mut a, &mut c);
            }
            let scale = a.iter().chain(b).chain(c).fold(1.0f64, |m, x| m.max(x.abs()));
            for q in 0..pts.len() as u32 {
                if t.contains(&q) {
                    continue;
                }
                if incircle(a, b, c, pts.point(q as usize)) > 1e-10 * scale.powi(4) {
                    bad += 1;
                }
            }
        }
        bad
    }

    #[test]
    fn three_points_make_one_triangle() {
        let tri = delaunay_2d(&cloud(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])).unwrap();
        assert_eq!(tri.triangles, vec![[0, 1, 2]]);
        assert_eq!(tri.edges, vec![[0, 1], [0, 2], [1, 2]]);
    }

    #[test]
    fn square_takes_smallest_id_diagonal() {
        let tri =
            delaunay_2d(&cloud(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])).unwrap();
        assert_eq!(tri.triangles, vec![[0, 1, 2], [0, 2, 3]]);
        assert_eq!(tri.edges.len(), 5);
        assert!(tri.edges.contains(&[0, 2]));
        assert_eq!(violations(&tri), 0);

        // relabelled so that the other diagonal carries id 0
        let tri =
            delaunay_2d(&cloud(&[[1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.0]])).unwrap();
        assert!(tri.edges.contains(&[0, 2]));
        assert_eq!(tri.triangles.len(), 2);
    }

    #[test]
    fn collinear_input_is_rejected() {
        let err = delaunay_2d(&cloud(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]))
            .unwrap_err();
        assert_eq!(err, GeometryError::Collinear);
    }

    #[test]
    fn collinear_hull_points_are_kept() {
        let tri = delaunay_2d(&cloud(&[
            [0.0, 0.0],
            [2.0, 0.0],
            [1.0, 0.0],
            [1.0, 1.0],
            [3.0, 0.0],
            [-1.0, 0.0],
        ]))
        .unwrap();
        // every point is used and no zero-area triangle is produced
        for t in &tri.triangles {
            let p = &tri.points;
            let area = super::super::orient2d(
                p.point(t[0] as usize),
                p.point(t[1] as usize),
                p.point(t[2] as usize),
            );
            assert!(area.abs() > 1e-9, "sliver {t:?}");
        }
        assert_eq!(tri.triangles.len(), 4);
        assert_eq!(violations(&tri), 0);
    }

    #[test]
    fn grid_points_triangulate_completely() {
        // heavy cocircularity: a 6x6 lattice
        let mut rows = vec![];
        for i in 0..6 {
            for j in 0..6 {
                rows.push([i as f64, j as f64]);
            }
        }
        let tri = delaunay_2d(&cloud(&rows)).unwrap();
        // 2 * n - 2 - h triangles for n = 36 points, h = 20 on the hull
        assert_eq!(tri.triangles.len(), 2 * 36 - 2 - 20);
        assert_eq!(violations(&tri), 0);
    }

    #[test]
    fn random_clouds_have_no_incircle_violations() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let rows: Vec<[f64; 2]> = (0..200)
                .map(|_| [rng.random::<f64>(), rng.random::<f64>()])
                .collect();
            let tri = delaunay_2d(&cloud(&rows)).unwrap();
            assert_eq!(violations(&tri), 0);
            // Euler: V - E + F = 1 for a triangulated disk
            assert_eq!(200 - tri.edges.len() as i64 + tri.triangles.len() as i64, 1);
        }
    }
}
