//! Closed-form extrema of sin/cos over an orientation interval, and the
//! one-period orientation range of the unicycle heading.
//!
//! The intervals may extend beyond `(-pi, pi]`. Each extremum is either the
//! critical value, when the interval contains a critical angle modulo 2pi, or
//! attained at an endpoint.

use std::f64::consts::PI;

use crate::interval::IntervalBox;

/// Range of headings reachable on `[0, tau]` from initial headings `theta0`
/// under constant angular velocity `omega` and disturbance `d3`.
/// The result is not wrapped back into `(-pi, pi]`.
pub fn orientation_interval(theta0: &IntervalBox, omega: f64, d3: &IntervalBox, tau: f64) -> IntervalBox {
    debug_assert_eq!(theta0.dim(), 1);
    debug_assert_eq!(d3.dim(), 1);
    debug_assert!(tau >= 0.0);
    let lo = theta0.lo()[0] + (tau * (omega + d3.lo()[0])).min(0.0);
    let hi = theta0.hi()[0] + (tau * (omega + d3.hi()[0])).max(0.0);
    IntervalBox::new(vec![lo], vec![hi]).expect("orientation interval")
}

/// Does `[lo, hi]` contain `c + 2*pi*k` for some integer `k`?
fn contains_mod_2pi(lo: f64, hi: f64, c: f64) -> bool {
    let period = 2.0 * PI;
    let k = ((lo - c) / period).ceil();
    c + k * period <= hi
}

/// Minimum of `cos` over `[lo, hi]`.
pub fn cos_min(lo: f64, hi: f64) -> f64 {
    debug_assert!(lo <= hi);
    if contains_mod_2pi(lo, hi, PI) {
        -1.0
    } else {
        lo.cos().min(hi.cos())
    }
}

/// Maximum of `cos` over `[lo, hi]`.
pub fn cos_max(lo: f64, hi: f64) -> f64 {
    debug_assert!(lo <= hi);
    if contains_mod_2pi(lo, hi, 0.0) {
        1.0
    } else {
        lo.cos().max(hi.cos())
    }
}

/// Minimum of `sin` over `[lo, hi]`.
pub fn sin_min(lo: f64, hi: f64) -> f64 {
    debug_assert!(lo <= hi);
    if contains_mod_2pi(lo, hi, -0.5 * PI) {
        -1.0
    } else {
        lo.sin().min(hi.sin())
    }
}

/// Maximum of `sin` over `[lo, hi]`.
pub fn sin_max(lo: f64, hi: f64) -> f64 {
    debug_assert!(lo <= hi);
    if contains_mod_2pi(lo, hi, 0.5 * PI) {
        1.0
    } else {
        lo.sin().max(hi.sin())
    }
}

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let w = x - 2.0 * PI * ((x + PI) / (2.0 * PI)).floor();
    if w <= -PI {
        PI
    } else {
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_min<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> f64 {
        (0..=n)
            .map(|k| f(lo + (hi - lo) * k as f64 / n as f64))
            .fold(f64::INFINITY, f64::min)
    }

    fn grid_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> f64 {
        (0..=n)
            .map(|k| f(lo + (hi - lo) * k as f64 / n as f64))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn orientation_examples() {
        let b = |lo: f64, hi: f64| IntervalBox::from_pairs(&[(lo, hi)]);
        let r = orientation_interval(&b(0.0, 0.0), 0.3, &b(0.0, 0.0), 4.0);
        assert!((r.lo()[0] - 0.0).abs() < 1e-12 && (r.hi()[0] - 1.2).abs() < 1e-12);

        let r = orientation_interval(&b(-0.3, 0.4), 0.0, &b(0.0, 0.0), 7.0);
        assert_eq!((r.lo()[0], r.hi()[0]), (-0.3, 0.4));

        let r = orientation_interval(&b(-0.1, 0.1), -0.15, &b(0.0, 0.0), 4.0);
        assert!((r.lo()[0] + 0.7).abs() < 1e-12 && (r.hi()[0] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn trig_examples() {
        assert!((cos_min(-PI / 4.0, PI / 4.0) - (PI / 4.0).cos()).abs() < 1e-12);
        assert_eq!(cos_min(PI / 2.0, 3.2), -1.0);
        assert_eq!(cos_max(-0.5, 0.3), 1.0);
        assert_eq!(sin_max(0.2, 2.0), 1.0);
        assert!((sin_min(0.2, 0.4) - 0.2f64.sin()).abs() < 1e-12);
    }

    #[test]
    fn trig_matches_dense_grid() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let lo = rng.gen_range(-1.5 * PI..1.5 * PI);
            let width = rng.gen_range(0.0..3.0 * PI);
            let hi = lo + width;
            let n = 4096;
            let grid_err = width / n as f64; // Lipschitz constant 1
            let tol = 1e-6 + grid_err;
            assert!((cos_min(lo, hi) - grid_min(f64::cos, lo, hi, n)).abs() <= tol);
            assert!((cos_max(lo, hi) - grid_max(f64::cos, lo, hi, n)).abs() <= tol);
            assert!((sin_min(lo, hi) - grid_min(f64::sin, lo, hi, n)).abs() <= tol);
            assert!((sin_max(lo, hi) - grid_max(f64::sin, lo, hi, n)).abs() <= tol);
        }
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(2.5 * PI) - 0.5 * PI).abs() < 1e-12);
        for k in -10..10 {
            let x = 0.37 + k as f64 * 2.0 * PI;
            assert!((wrap_angle(x) - 0.37).abs() < 1e-9);
        }
    }
}
