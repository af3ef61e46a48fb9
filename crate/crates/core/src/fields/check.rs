//! Finite-difference self-check of analytic field derivatives.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::interval::Interval;

use super::{Field1D, Field2D};

pub const FD_STEP: f64 = 1e-5;
pub const FD_REL_TOL: f64 = 1e-4;
pub const FD_ABS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct FdCheck {
    pub samples: usize,
    pub worst_error: f64,
    /// `(order, x, u)` of the worst comparison.
    pub worst_at: Option<(usize, f64, f64)>,
    pub passed: bool,
}

/// Richardson-extrapolated central difference, `O(h⁴)`.
fn richardson(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    let d = |h: f64| (f(h) - f(-h)) / (2.0 * h);
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

fn consistent(analytic: f64, fd: f64) -> (bool, f64) {
    let diff = (analytic - fd).abs();
    let scale = analytic.abs().max(fd.abs());
    let ok = diff <= FD_ABS_TOL || diff <= FD_REL_TOL * scale;
    let err = if scale > 0.0 {
        diff / scale.max(1.0)
    } else {
        diff
    };
    (ok, err)
}

/// Compares `deriv(k+1)` with central differences of `deriv(k)` for every
/// `k < max_order` (capped at 6) at `points` uniform samples of `domain`.
pub fn check_field_1d(field: &dyn Field1D, domain: Interval, points: usize, seed: u64) -> FdCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let top = field.max_order().min(6);
    let mut out = FdCheck {
        samples: 0,
        worst_error: 0.0,
        worst_at: None,
        passed: true,
    };
    for _ in 0..points {
        let x = rng.random_range(domain.lo..domain.hi);
        for k in 0..top {
            let fd = richardson(|h| field.deriv(k, x + h), FD_STEP);
            let (ok, err) = consistent(field.deriv(k + 1, x), fd);
            out.samples += 1;
            if err > out.worst_error || (!ok && out.passed) {
                out.worst_error = err.max(out.worst_error);
                out.worst_at = Some((k + 1, x, 0.0));
            }
            out.passed &= ok;
        }
    }
    out
}

/// Same check in both directions for a two-variable field, on the box
/// `x_domain × u_domain`, up to total order `min(max_order, 4)`.
pub fn check_field_2d(
    field: &dyn Field2D,
    x_domain: Interval,
    u_domain: Interval,
    points: usize,
    seed: u64,
) -> FdCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let top = field.max_order().min(4);
    let mut out = FdCheck {
        samples: 0,
        worst_error: 0.0,
        worst_at: None,
        passed: true,
    };
    for _ in 0..points {
        let x = rng.random_range(x_domain.lo..x_domain.hi);
        let u = rng.random_range(u_domain.lo..u_domain.hi);
        for d in 0..top {
            for b in 0..=d {
                let a = d - b;
                let fx = richardson(|h| field.partial(a, b, x + h, u), FD_STEP);
                let fu = richardson(|h| field.partial(a, b, x, u + h), FD_STEP);
                for (analytic, fd) in [
                    (field.partial(a + 1, b, x, u), fx),
                    (field.partial(a, b + 1, x, u), fu),
                ] {
                    let (ok, err) = consistent(analytic, fd);
                    out.samples += 1;
                    if err > out.worst_error || (!ok && out.passed) {
                        out.worst_error = err.max(out.worst_error);
                        out.worst_at = Some((d + 1, x, u));
                    }
                    out.passed &= ok;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{builtin_ch_eta, builtin_flat_bump, expr_1d, expr_2d, Polynomial};

    #[test]
    fn builtins_pass() {
        let dom = Interval::new(-2.0, 2.0).unwrap();
        let bump = builtin_flat_bump(0.0, 1.5, 1.0).unwrap();
        assert!(check_field_1d(bump.as_ref(), dom, 64, 1).passed);
        let p = Polynomial::new(vec![0.5, -1.0, 0.25, 0.1]);
        assert!(check_field_1d(&p, dom, 64, 2).passed);
        let e = expr_1d("sin(x) + 2").unwrap();
        assert!(check_field_1d(e.as_ref(), dom, 64, 3).passed);
        let eta = builtin_ch_eta(expr_1d("0.5*cos(x)").unwrap()).unwrap();
        assert!(check_field_2d(eta.as_ref(), dom, dom, 64, 4).passed);
        let f = expr_2d("exp(-(x^2+1)*u)").unwrap();
        assert!(check_field_2d(f.as_ref(), dom, Interval::new(-1.0, 1.0).unwrap(), 64, 5).passed);
    }

    #[derive(Debug)]
    struct Wrong;
    impl Field1D for Wrong {
        fn deriv(&self, k: usize, x: f64) -> f64 {
            match k {
                0 => x.sin(),
                _ => x.sin(),
            }
        }
        fn max_order(&self) -> usize {
            4
        }
        fn describe(&self) -> String {
            "wrong".into()
        }
    }

    #[test]
    fn detects_wrong_derivative() {
        let c = check_field_1d(&Wrong, Interval::new(0.5, 1.5).unwrap(), 8, 7);
        assert!(!c.passed);
        assert!(c.worst_at.is_some());
    }
}
