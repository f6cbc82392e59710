//! Fixed-step classical Runge-Kutta integration.

use crate::error::ReachError;

/// Integrates `dx/dt = rhs(x)` from `x0` over `[0, t]` with `steps` equal
/// RK4 steps, returning the state at time `t`.
pub fn rk4<F>(mut rhs: F, x0: &[f64], t: f64, steps: usize) -> Result<Vec<f64>, ReachError>
where
    F: FnMut(&[f64], &mut [f64]),
{
    assert!(t >= 0.0, "horizon must be non-negative");
    assert!(steps >= 1, "at least one step required");
    let n = x0.len();
    let h = t / steps as f64;
    let mut x = x0.to_vec();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    for step in 0..steps {
        rhs(&x, &mut k1);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k1[i];
        }
        rhs(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k2[i];
        }
        rhs(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = x[i] + h * k3[i];
        }
        rhs(&tmp, &mut k4);
        for i in 0..n {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(ReachError::NonFiniteState { step });
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let x = rk4(|x, out| out[0] = -x[0], &[1.0], 1.0, 100).unwrap();
        assert!((x[0] - (-1.0f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn constant_field() {
        let x = rk4(|_, out| out.fill(0.0), &[3.0, -2.0], 17.0, 4).unwrap();
        assert_eq!(x, vec![3.0, -2.0]);
    }

    #[test]
    fn straight_line_unicycle() {
        // theta = 0, v = 0.5, omega = 0: closed-form straight-line motion
        let rhs = |x: &[f64], out: &mut [f64]| {
            out[0] = 0.5 * x[2].cos();
            out[1] = 0.5 * x[2].sin();
            out[2] = 0.0;
        };
        let x = rk4(rhs, &[1.0, 2.0, 0.0], 4.0, 64).unwrap();
        assert!((x[0] - 3.0).abs() < 1e-9);
        assert!((x[1] - 2.0).abs() < 1e-9);
        assert!(x[2].abs() < 1e-12);
    }

    #[test]
    fn divergence_detected() {
        let err = rk4(|x, out| out[0] = x[0] * x[0], &[1.0], 10.0, 8).unwrap_err();
        assert!(matches!(err, ReachError::NonFiniteState { .. }));
    }
}
