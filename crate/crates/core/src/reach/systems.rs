//! Built-in system models besides the unicycle: an n-dimensional single
//! integrator (used by the toy scenarios), a monotone linear system and a
//! non-monotone cubic system (used by the verification suites).

use crate::interval::IntervalBox;

use super::{BoundsTable, SystemModel};

/// `dz_i/dt = u_i + d_i`. Every partial derivative is constant, so the
/// decomposition collapses to the field itself.
#[derive(Debug, Clone)]
pub struct SingleIntegrator {
    state_space: IntervalBox,
    control_space: IntervalBox,
    disturbance_space: IntervalBox,
}

impl SingleIntegrator {
    pub fn new(
        state_space: IntervalBox,
        control_space: IntervalBox,
        disturbance_space: IntervalBox,
    ) -> Self {
        assert_eq!(state_space.dim(), control_space.dim());
        assert_eq!(state_space.dim(), disturbance_space.dim());
        Self {
            state_space,
            control_space,
            disturbance_space,
        }
    }
}

impl SystemModel for SingleIntegrator {
    fn state_dim(&self) -> usize {
        self.state_space.dim()
    }
    fn control_dim(&self) -> usize {
        self.state_space.dim()
    }
    fn disturbance_dim(&self) -> usize {
        self.state_space.dim()
    }

    fn field(&self, _z: &[f64], u: &[f64], d: &[f64], out: &mut [f64]) {
        for i in 0..out.len() {
            out[i] = u[i] + d[i];
        }
    }

    fn jacobian_bounds(
        &self,
        _z_box: &IntervalBox,
        _u: &[f64],
        _d_box: &IntervalBox,
        _horizon: f64,
    ) -> BoundsTable {
        let n = self.state_dim();
        let mut t = BoundsTable::zeros(n, n, n);
        for i in 0..n {
            t.u.set(i, i, 1.0, 1.0);
            t.d.set(i, i, 1.0, 1.0);
        }
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
}

/// `dz/dt = A z + B u + d` with entrywise non-negative `A`, hence monotone
/// and classified all-C1; the over-approximation is tight for this system.
#[derive(Debug, Clone)]
pub struct MonotoneLinear {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    state_space: IntervalBox,
    control_space: IntervalBox,
    disturbance_space: IntervalBox,
}

impl MonotoneLinear {
    pub fn new(
        a: Vec<Vec<f64>>,
        b: Vec<Vec<f64>>,
        state_space: IntervalBox,
        control_space: IntervalBox,
        disturbance_space: IntervalBox,
    ) -> Self {
        let n = state_space.dim();
        assert_eq!(a.len(), n);
        assert!(a.iter().all(|row| row.len() == n && row.iter().all(|&v| v >= 0.0)));
        assert_eq!(b.len(), n);
        Self {
            a,
            b,
            state_space,
            control_space,
            disturbance_space,
        }
    }
}

impl SystemModel for MonotoneLinear {
    fn state_dim(&self) -> usize {
        self.state_space.dim()
    }
    fn control_dim(&self) -> usize {
        self.control_space.dim()
    }
    fn disturbance_dim(&self) -> usize {
        self.disturbance_space.dim()
    }

    fn field(&self, z: &[f64], u: &[f64], d: &[f64], out: &mut [f64]) {
        for i in 0..self.a.len() {
            let mut v = d[i];
            for j in 0..z.len() {
                v += self.a[i][j] * z[j];
            }
            for k in 0..u.len() {
                v += self.b[i][k] * u[k];
            }
            out[i] = v;
        }
    }

    fn jacobian_bounds(
        &self,
        _z_box: &IntervalBox,
        _u: &[f64],
        _d_box: &IntervalBox,
        _horizon: f64,
    ) -> BoundsTable {
        let (n, p, q) = (self.state_dim(), self.control_dim(), self.disturbance_dim());
        let mut t = BoundsTable::zeros(n, p, q);
        for i in 0..n {
            for j in 0..n {
                t.z.set(i, j, self.a[i][j], self.a[i][j]);
            }
            for k in 0..p {
                t.u.set(i, k, self.b[i][k], self.b[i][k]);
            }
            t.d.set(i, i, 1.0, 1.0);
        }
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
}

/// Non-monotone planar system with a state-dependent Jacobian bound:
///
/// ```text
/// dz1/dt = z2
/// dz2/dt = -z1^3 - 0.5 z2 + u + d
/// ```
///
/// `df2/dz1 = -3 z1^2` changes magnitude with the state, so the bounds
/// provider encloses the states reachable within the horizon before bounding
/// the derivative over that enclosure.
#[derive(Debug, Clone)]
pub struct CubicOscillator {
    state_space: IntervalBox,
    control_space: IntervalBox,
    disturbance_space: IntervalBox,
}

impl CubicOscillator {
    pub fn new(
        state_space: IntervalBox,
        control_space: IntervalBox,
        disturbance_space: IntervalBox,
    ) -> Self {
        assert_eq!(state_space.dim(), 2);
        assert_eq!(control_space.dim(), 1);
        assert_eq!(disturbance_space.dim(), 1);
        Self {
            state_space,
            control_space,
            disturbance_space,
        }
    }

    /// Interval extension of the field over a state box.
    fn field_range(&self, b: &IntervalBox, u: f64, d: &IntervalBox) -> [(f64, f64); 2] {
        let (z1l, z1h) = (b.lo()[0], b.hi()[0]);
        let (z2l, z2h) = (b.lo()[1], b.hi()[1]);
        let f1 = (z2l, z2h);
        // -z1^3 is decreasing in z1
        let cube_lo = -z1h.powi(3);
        let cube_hi = -z1l.powi(3);
        let f2 = (
            cube_lo - 0.5 * z2h + u + d.lo()[0],
            cube_hi - 0.5 * z2l + u + d.hi()[0],
        );
        [f1, f2]
    }

    /// Box enclosing all states reachable from `z_box` within `[0, horizon]`,
    /// via a few rounds of interval forward bounding.
    fn reach_enclosure(&self, z_box: &IntervalBox, u: f64, d: &IntervalBox, horizon: f64) -> IntervalBox {
        let mut enc = z_box.clone();
        for _ in 0..4 {
            let r = self.field_range(&enc, u, d);
            let lo: Vec<f64> = (0..2)
                .map(|i| z_box.lo()[i] + horizon * r[i].0.min(0.0) * 1.1)
                .collect();
            let hi: Vec<f64> = (0..2)
                .map(|i| z_box.hi()[i] + horizon * r[i].1.max(0.0) * 1.1)
                .collect();
            let next = IntervalBox::new(lo, hi).expect("enclosure bounds");
            if next == enc {
                break;
            }
            enc = next;
        }
        enc
    }
}

impl SystemModel for CubicOscillator {
    fn state_dim(&self) -> usize {
        2
    }
    fn control_dim(&self) -> usize {
        1
    }
    fn disturbance_dim(&self) -> usize {
        1
    }

    fn field(&self, z: &[f64], u: &[f64], d: &[f64], out: &mut [f64]) {
        out[0] = z[1];
        out[1] = -z[0].powi(3) - 0.5 * z[1] + u[0] + d[0];
    }

    fn jacobian_bounds(
        &self,
        z_box: &IntervalBox,
        u: &[f64],
        d_box: &IntervalBox,
        horizon: f64,
    ) -> BoundsTable {
        let enc = self.reach_enclosure(z_box, u[0], d_box, horizon);
        let (z1l, z1h) = (enc.lo()[0], enc.hi()[0]);
        // z1^2 range over the enclosure
        let sq_max = z1l.powi(2).max(z1h.powi(2));
        let sq_min = if z1l <= 0.0 && 0.0 <= z1h {
            0.0
        } else {
            z1l.powi(2).min(z1h.powi(2))
        };
        let mut t = BoundsTable::zeros(2, 1, 1);
        t.z.set(0, 1, 1.0, 1.0);
        t.z.set(1, 0, -3.0 * sq_max, -3.0 * sq_min);
        t.z.set(1, 1, -0.5, -0.5);
        t.u.set(1, 0, 1.0, 1.0);
        t.d.set(1, 0, 1.0, 1.0);
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
}
