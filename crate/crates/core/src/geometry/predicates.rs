//! Floating-point orientation and in-circle tests with an epsilon band.
//!
//! Values whose magnitude falls inside the band are treated as exact zeros and
//! resolved by symbolic perturbation: point `i` is lifted to
//! `|p_i|^2 - eps_i` with `eps_0 >> eps_1 >> ...`, so lower ids win ties.
//! For four cocircular points this picks the diagonal through the smallest
//! vertex id.

/// Twice the signed area of `(a, b, c)`; positive when counter-clockwise.
#[inline]
pub fn orient2d(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Positive when `d` lies inside the circle through counter-clockwise
/// `(a, b, c)`.
#[inline]
pub fn incircle(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> f64 {
    let (adx, ady) = (a[0] - d[0], a[1] - d[1]);
    let (bdx, bdy) = (b[0] - d[0], b[1] - d[1]);
    let (cdx, cdy) = (c[0] - d[0], c[1] - d[1]);
    let alift = adx * adx + ady * ady;
    let blift = bdx * bdx + bdy * bdy;
    let clift = cdx * cdx + cdy * cdy;
    alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy) + clift * (adx * bdy - bdx * ady)
}

/// Predicates bound to a coordinate scale.
#[derive(Debug, Clone, Copy)]
pub struct Predicates {
    orient_band: f64,
    incircle_band: f64,
}

impl Predicates {
    /// `scale` is the largest coordinate extent of the input.
    pub fn new(scale: f64) -> Self {
        let s = if scale > 0.0 { scale } else { 1.0 };
        Self {
            orient_band: 1e-12 * s * s,
            incircle_band: 1e-12 * s * s * s * s,
        }
    }

    /// Sign of the orientation of `(a, b, c)`: 1, -1, or 0 inside the band.
    pub fn orient(&self, a: &[f64], b: &[f64], c: &[f64]) -> i8 {
        sign_in_band(orient2d(a, b, c), self.orient_band)
    }

    /// Perturbed in-circle test for point `d` against counter-clockwise
    /// triangle `(a, b, c)`. Returns true when `d` is strictly inside after
    /// perturbation. Ids order the symbolic tie-break.
    pub fn in_circle(&self, pts: [(&[f64], u32); 4]) -> bool {
        let [(a, _), (b, _), (c, _), (d, _)] = pts;
        let det = incircle(a, b, c, d);
        match sign_in_band(det, self.incircle_band) {
            1 => return true,
            -1 => return false,
            _ => {}
        }
        // d det / d lift_i for rows (a, b, c, d) of the lifted 4x4 determinant.
        let coeff = |i: usize| match i {
            0 => orient2d(b, c, d),
            1 => -orient2d(a, c, d),
            2 => orient2d(a, b, d),
            _ => -orient2d(a, b, c),
        };
        let mut order = [0usize, 1, 2, 3];
        order.sort_by_key(|&i| pts[i].1);
        for i in order {
            match sign_in_band(coeff(i), self.orient_band) {
                // lowering lift_i by eps_i changes det by -eps_i * coeff
                1 => return false,
                -1 => return true,
                _ => {}
            }
        }
        false
    }
}

#[inline]
fn sign_in_band(x: f64, band: f64) -> i8 {
    if x > band {
        1
    } else if x < -band {
        -1
    } else {
        0
    }
}
