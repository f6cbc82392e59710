//! Interval over-approximation of finite-time reachable sets.
//!
//! Any continuously differentiable vector field `f(z, u, d)` with known
//! bounds on its partial derivatives admits a monotone decomposition
//! function `g`. Stacking `g` with its argument-swapped copy yields a `2n`
//! dimensional monotone embedding whose single trajectory from the corner
//! pair `(lo, hi)` bounds every trajectory of the original system started
//! inside the box.

mod integrate;
pub mod systems;
pub mod trig;
mod unicycle;

pub use integrate::rk4;
pub use unicycle::Unicycle;

use crate::error::ReachError;
use crate::interval::IntervalBox;

/// Continuous-time control system `dz/dt = f(z, u, d)` together with a
/// provider of interval bounds on the partial derivatives of `f`.
///
/// The bounds returned by [`SystemModel::jacobian_bounds`] must hold for all
/// states reachable from the queried box within the queried horizon; the
/// provider may exploit the box and horizon to sharpen them, or fall back to
/// global bounds over the state space.
pub trait SystemModel: Sync {
    fn state_dim(&self) -> usize;
    fn control_dim(&self) -> usize;
    fn disturbance_dim(&self) -> usize;

    fn field(&self, z: &[f64], u: &[f64], d: &[f64], out: &mut [f64]);

    fn jacobian_bounds(
        &self,
        z_box: &IntervalBox,
        u: &[f64],
        d_box: &IntervalBox,
        horizon: f64,
    ) -> BoundsTable;

    fn state_space(&self) -> &IntervalBox;
    fn control_space(&self) -> &IntervalBox;
    fn disturbance_space(&self) -> &IntervalBox;

    /// State dimensions living on a circle (wrapped into `(-pi, pi]` when
    /// mapping states to partition symbols). Reachability itself never wraps.
    fn wrapped_dims(&self) -> &[usize] {
        &[]
    }
}

/// Sign case of one partial-derivative interval `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignCase {
    /// `a >= 0`: positive.
    C1,
    /// `a <= 0 <= b`, `|a| <= |b|`: mostly positive.
    C2,
    /// `a <= 0 <= b`, `|a| > |b|`: mostly negative.
    C3,
    /// `b <= 0`: negative.
    C4,
}

impl SignCase {
    /// Plain argument (`c_j`) for C1/C2, starred (`c*_j`) for C3/C4.
    pub fn uses_plain_argument(self) -> bool {
        matches!(self, SignCase::C1 | SignCase::C2)
    }
}

/// Classifies a partial-derivative bound interval. Ties `|a| = |b|` go to C2.
pub fn classify(a: f64, b: f64) -> Result<SignCase, ReachError> {
    if a > b {
        return Err(ReachError::InvalidBounds {
            family: '?',
            i: 0,
            j: 0,
            a,
            b,
        });
    }
    Ok(if a >= 0.0 {
        SignCase::C1
    } else if b <= 0.0 {
        SignCase::C4
    } else if a.abs() <= b.abs() {
        SignCase::C2
    } else {
        SignCase::C3
    })
}

/// Row-major matrix of per-entry derivative bounds for one variable family.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsMatrix {
    pub rows: usize,
    pub cols: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl BoundsMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            a: vec![0.0; rows * cols],
            b: vec![0.0; rows * cols],
        }
    }

    pub fn set(&mut self, i: usize, j: usize, a: f64, b: f64) {
        self.a[i * self.cols + j] = a;
        self.b[i * self.cols + j] = b;
    }

    pub fn get(&self, i: usize, j: usize) -> (f64, f64) {
        (self.a[i * self.cols + j], self.b[i * self.cols + j])
    }
}

/// Bounds `df_i/dc_j in [a^c_ij, b^c_ij]` for the three families
/// `c in {z, u, d}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsTable {
    pub z: BoundsMatrix,
    pub u: BoundsMatrix,
    pub d: BoundsMatrix,
}

impl BoundsTable {
    pub fn zeros(n: usize, p: usize, q: usize) -> Self {
        Self {
            z: BoundsMatrix::zeros(n, n),
            u: BoundsMatrix::zeros(n, p),
            d: BoundsMatrix::zeros(n, q),
        }
    }

    fn validate(&self, n: usize, p: usize, q: usize) -> Result<(), ReachError> {
        for (family, m, cols) in [('z', &self.z, n), ('u', &self.u, p), ('d', &self.d, q)] {
            if m.rows != n || m.cols != cols {
                return Err(ReachError::ShapeMismatch {
                    family,
                    expected: cols,
                    got: m.cols,
                });
            }
            for i in 0..m.rows {
                for j in 0..m.cols {
                    let (a, b) = m.get(i, j);
                    if !(a <= b) || !a.is_finite() || !b.is_finite() {
                        return Err(ReachError::InvalidBounds { family, i, j, a, b });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Per-entry case tags and slopes defining the decomposition function of
/// Eq-style form `g_i = f_i(Z_i, U_i, D_i) + alpha_i^z (z - z*) + ...`.
#[derive(Debug, Clone)]
pub struct DecompositionSpec {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub case_z: Vec<SignCase>,
    pub case_u: Vec<SignCase>,
    pub case_d: Vec<SignCase>,
    pub alpha_z: Vec<f64>,
    pub alpha_u: Vec<f64>,
    pub alpha_d: Vec<f64>,
}

fn slope(case: SignCase, a: f64, b: f64) -> f64 {
    match case {
        SignCase::C2 => -a,
        SignCase::C3 => b,
        SignCase::C1 | SignCase::C4 => 0.0,
    }
}

/// Builds the decomposition spec for a system from a bounds table.
pub fn build_decomposition(
    sys: &dyn SystemModel,
    bounds: &BoundsTable,
) -> Result<DecompositionSpec, ReachError> {
    let (n, p, q) = (sys.state_dim(), sys.control_dim(), sys.disturbance_dim());
    bounds.validate(n, p, q)?;
    let mut spec = DecompositionSpec {
        n,
        p,
        q,
        case_z: Vec::with_capacity(n * n),
        case_u: Vec::with_capacity(n * p),
        case_d: Vec::with_capacity(n * q),
        alpha_z: Vec::with_capacity(n * n),
        alpha_u: Vec::with_capacity(n * p),
        alpha_d: Vec::with_capacity(n * q),
    };
    for (m, cases, alphas) in [
        (&bounds.z, &mut spec.case_z, &mut spec.alpha_z),
        (&bounds.u, &mut spec.case_u, &mut spec.alpha_u),
        (&bounds.d, &mut spec.case_d, &mut spec.alpha_d),
    ] {
        for i in 0..m.rows {
            for j in 0..m.cols {
                let (a, b) = m.get(i, j);
                let case = classify(a, b)?;
                cases.push(case);
                alphas.push(slope(case, a, b));
            }
        }
    }
    Ok(spec)
}

/// Reusable scratch buffers for evaluating the decomposition function and
/// its embedding; avoids allocation in integrator inner loops.
pub struct Evaluator<'a> {
    spec: &'a DecompositionSpec,
    sys: &'a dyn SystemModel,
    arg_z: Vec<f64>,
    arg_u: Vec<f64>,
    arg_d: Vec<f64>,
    f_out: Vec<f64>,
}

impl<'a> Evaluator<'a> {
    pub fn new(spec: &'a DecompositionSpec, sys: &'a dyn SystemModel) -> Self {
        Self {
            spec,
            sys,
            arg_z: vec![0.0; spec.n],
            arg_u: vec![0.0; spec.p],
            arg_d: vec![0.0; spec.q],
            f_out: vec![0.0; spec.n],
        }
    }

    /// Decomposition function `g(z, u, d, z*, u*, d*)`, written into `out`.
    #[allow(clippy::too_many_arguments)]
    pub fn g(
        &mut self,
        z: &[f64],
        u: &[f64],
        d: &[f64],
        zs: &[f64],
        us: &[f64],
        ds: &[f64],
        out: &mut [f64],
    ) {
        let spec = self.spec;
        for i in 0..spec.n {
            for j in 0..spec.n {
                self.arg_z[j] = if spec.case_z[i * spec.n + j].uses_plain_argument() {
                    z[j]
                } else {
                    zs[j]
                };
            }
            for j in 0..spec.p {
                self.arg_u[j] = if spec.case_u[i * spec.p + j].uses_plain_argument() {
                    u[j]
                } else {
                    us[j]
                };
            }
            for j in 0..spec.q {
                self.arg_d[j] = if spec.case_d[i * spec.q + j].uses_plain_argument() {
                    d[j]
                } else {
                    ds[j]
                };
            }
            self.sys.field(&self.arg_z, &self.arg_u, &self.arg_d, &mut self.f_out);
            let mut v = self.f_out[i];
            for j in 0..spec.n {
                v += spec.alpha_z[i * spec.n + j] * (z[j] - zs[j]);
            }
            for j in 0..spec.p {
                v += spec.alpha_u[i * spec.p + j] * (u[j] - us[j]);
            }
            for j in 0..spec.q {
                v += spec.alpha_d[i * spec.q + j] * (d[j] - ds[j]);
            }
            out[i] = v;
        }
    }

    /// Embedding field `h` on the stacked state `(z, z*)`: the first `n`
    /// components are `g(z, u, d, z*, u*, d*)`, the last `n` are the
    /// argument-swapped evaluation.
    #[allow(clippy::too_many_arguments)]
    pub fn h(
        &mut self,
        stacked: &[f64],
        u: &[f64],
        d: &[f64],
        us: &[f64],
        ds: &[f64],
        out: &mut [f64],
    ) {
        let n = self.spec.n;
        debug_assert_eq!(stacked.len(), 2 * n);
        debug_assert_eq!(out.len(), 2 * n);
        let (z, zs) = stacked.split_at(n);
        let (lo, hi) = out.split_at_mut(n);
        self.g(z, u, d, zs, us, ds, lo);
        self.g(zs, us, ds, z, u, d, hi);
    }
}

/// Convenience wrapper allocating fresh output; see [`Evaluator::g`].
#[allow(clippy::too_many_arguments)]
pub fn g_eval(
    spec: &DecompositionSpec,
    sys: &dyn SystemModel,
    z: &[f64],
    u: &[f64],
    d: &[f64],
    zs: &[f64],
    us: &[f64],
    ds: &[f64],
) -> Vec<f64> {
    let mut out = vec![0.0; spec.n];
    Evaluator::new(spec, sys).g(z, u, d, zs, us, ds, &mut out);
    out
}

/// Convenience wrapper allocating fresh output; see [`Evaluator::h`].
pub fn h_eval(
    spec: &DecompositionSpec,
    sys: &dyn SystemModel,
    stacked: &[f64],
    u: &[f64],
    d: &[f64],
    us: &[f64],
    ds: &[f64],
) -> Vec<f64> {
    let mut out = vec![0.0; 2 * spec.n];
    Evaluator::new(spec, sys).h(stacked, u, d, us, ds, &mut out);
    out
}

/// Interval over-approximation of a reachable set.
#[derive(Debug, Clone)]
pub struct ReachResult {
    pub over_box: IntervalBox,
    pub horizon: f64,
    pub control: Vec<f64>,
    /// Integrator step count used.
    pub steps: usize,
}

/// Default RK4 substep count per sampling period.
pub const DEFAULT_RK4_STEPS: usize = 64;

/// Over-approximates the set of states reachable at time `t` from any state
/// in `z_box` under constant control `u` and any disturbance signal within
/// `d_box`, by integrating the `2n`-dimensional monotone embedding from the
/// corner pair `(z_box.lo, z_box.hi)`.
pub fn over_approximate(
    sys: &dyn SystemModel,
    z_box: &IntervalBox,
    u: &[f64],
    d_box: &IntervalBox,
    t: f64,
    steps: usize,
) -> Result<ReachResult, ReachError> {
    let n = sys.state_dim();
    assert_eq!(z_box.dim(), n, "initial box dimension");
    assert!(t > 0.0, "horizon must be positive");
    let bounds = sys.jacobian_bounds(z_box, u, d_box, t);
    let spec = build_decomposition(sys, &bounds)?;
    let mut eval = Evaluator::new(&spec, sys);
    let d_lo = d_box.lo().to_vec();
    let d_hi = d_box.hi().to_vec();
    let mut x0 = z_box.lo().to_vec();
    x0.extend_from_slice(z_box.hi());
    let xt = rk4(
        |x, out| eval.h(x, u, &d_lo, u, &d_hi, out),
        &x0,
        t,
        steps,
    )?;
    // Monotonicity of the embedding keeps lo <= hi; guard against the last
    // ulp of integration noise on degenerate boxes.
    let lo: Vec<f64> = (0..n).map(|i| xt[i].min(xt[n + i])).collect();
    let hi: Vec<f64> = (0..n).map(|i| xt[i].max(xt[n + i])).collect();
    Ok(ReachResult {
        over_box: IntervalBox::new(lo, hi)?,
        horizon: t,
        control: u.to_vec(),
        steps,
    })
}
