//! Disturbed unicycle model with heading-range-sharpened Jacobian bounds.

use std::f64::consts::PI;

use crate::interval::IntervalBox;

use super::trig::{cos_max, cos_min, orientation_interval, sin_max, sin_min};
use super::{BoundsTable, SystemModel};

/// `dx = v cos(theta) + d1`, `dy = v sin(theta) + d2`, `dtheta = omega + d3`.
///
/// The only non-constant partial derivatives are `df1/dtheta = -v sin(theta)`
/// and `df2/dtheta = v cos(theta)`; their bounds are computed per query from
/// the set of headings reachable within the horizon, which is much sharper
/// than the global `[-v, v]`.
#[derive(Debug, Clone)]
pub struct Unicycle {
    state_space: IntervalBox,
    control_space: IntervalBox,
    disturbance_space: IntervalBox,
}

const WRAPPED: [usize; 1] = [2];

impl Unicycle {
    /// `xy` is the 2D workspace; the heading lives in `(-pi, pi]`.
    pub fn new(xy: &IntervalBox, control_space: IntervalBox, disturbance_space: IntervalBox) -> Self {
        assert_eq!(xy.dim(), 2);
        assert_eq!(control_space.dim(), 2);
        assert_eq!(disturbance_space.dim(), 3);
        let state_space = xy.product(&IntervalBox::from_pairs(&[(-PI, PI)]));
        Self {
            state_space,
            control_space,
            disturbance_space,
        }
    }
}

impl SystemModel for Unicycle {
    fn state_dim(&self) -> usize {
        3
    }
    fn control_dim(&self) -> usize {
        2
    }
    fn disturbance_dim(&self) -> usize {
        3
    }

    fn field(&self, z: &[f64], u: &[f64], d: &[f64], out: &mut [f64]) {
        let (v, omega) = (u[0], u[1]);
        out[0] = v * z[2].cos() + d[0];
        out[1] = v * z[2].sin() + d[1];
        out[2] = omega + d[2];
    }

    fn jacobian_bounds(
        &self,
        z_box: &IntervalBox,
        u: &[f64],
        d_box: &IntervalBox,
        horizon: f64,
    ) -> BoundsTable {
        let (v, omega) = (u[0], u[1]);
        let theta0 = IntervalBox::new(vec![z_box.lo()[2]], vec![z_box.hi()[2]]).unwrap();
        let d3 = IntervalBox::new(vec![d_box.lo()[2]], vec![d_box.hi()[2]]).unwrap();
        let theta = orientation_interval(&theta0, omega, &d3, horizon);
        let (tl, th) = (theta.lo()[0], theta.hi()[0]);
        let (smin, smax) = (sin_min(tl, th), sin_max(tl, th));
        let (cmin, cmax) = (cos_min(tl, th), cos_max(tl, th));
        let (a13, b13, a23, b23) = if v >= 0.0 {
            (-v * smax, -v * smin, v * cmin, v * cmax)
        } else {
            (-v * smin, -v * smax, v * cmax, v * cmin)
        };
        let mut t = BoundsTable::zeros(3, 2, 3);
        t.z.set(0, 2, a13, b13);
        t.z.set(1, 2, a23, b23);
        for i in 0..3 {
            t.d.set(i, i, 1.0, 1.0);
        }
        // control partials are irrelevant: u = u* over a sampling period
        t
    }

    fn state_space(&self) -> &IntervalBox {
        &self.state_space
    }
    fn control_space(&self) -> &IntervalBox {
        &self.control_space
    }
    fn disturbance_space(&self) -> &IntervalBox {
        &self.disturbance_space
    }

    fn wrapped_dims(&self) -> &[usize] {
        &WRAPPED
    }
}
