use alloc::vec::Vec;

use super::{axpy, dot, norm};

/// Conjugate gradients for a symmetric positive semidefinite operator.
///
/// Stops once `‖b - Ax‖ ≤ tol · ‖b‖` or after `max_iter` steps and returns the
/// iterate together with the final relative residual. For singular systems
/// with a consistent right-hand side this converges to a least-squares
/// solution; callers that need exact projections re-project the remainder.
pub fn conjugate_gradient<F>(mut apply: F, b: &[f64], tol: f64, max_iter: usize) -> (Vec<f64>, f64)
where
    F: FnMut(&[f64], &mut [f64]),
{
    let n = b.len();
    let mut x = alloc::vec![0.0; n];
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return (x, 0.0);
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = alloc::vec![0.0; n];
    let mut rr = dot(&r, &r);
    for _ in 0..max_iter {
        if libm::sqrt(rr) <= tol * bnorm {
            break;
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            break;
        }
        let alpha = rr / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let next = dot(&r, &r);
        let beta = next / rr;
        rr = next;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
    }
    (x, libm::sqrt(rr) / bnorm)
}
