//! Fixed-step classical Runge–Kutta.

pub fn rk4_step<const N: usize, F>(f: &F, y: [f64; N], dt: f64) -> [f64; N]
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let add = |a: &[f64; N], b: &[f64; N], s: f64| -> [f64; N] {
        let mut out = *a;
        for (o, x) in out.iter_mut().zip(b) {
            *o += s * x;
        }
        out
    };
    let k1 = f(&y);
    let k2 = f(&add(&y, &k1, dt / 2.0));
    let k3 = f(&add(&y, &k2, dt / 2.0));
    let k4 = f(&add(&y, &k3, dt));
    let mut out = y;
    for i in 0..N {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Integrates from `t = 0` to `t_end` (either sign) with steps of at most
/// `|dt|`, landing exactly on `t_end`.
pub fn rk4_integrate<const N: usize, F>(f: &F, y0: [f64; N], t_end: f64, dt: f64) -> [f64; N]
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let steps = (t_end.abs() / dt.abs()).ceil().max(1.0) as usize;
    let h = t_end / steps as f64;
    (0..steps).fold(y0, |y, _| rk4_step(f, y, h))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let y = rk4_integrate(&|y: &[f64; 1]| [-y[0]], [1.0], 2.0, 1e-2);
        assert!((y[0] - (-2.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn fourth_order_convergence() {
        let f = |y: &[f64; 1]| [y[0]];
        let err = |dt: f64| (rk4_integrate(&f, [1.0], 1.0, dt)[0] - 1f64.exp()).abs();
        let ratio = err(0.1) / err(0.05);
        assert!((14.0..18.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn backward_integration() {
        let y = rk4_integrate(&|y: &[f64; 1]| [-y[0]], [1.0], -1.0, 1e-3);
        assert!((y[0] - 1f64.exp()).abs() < 1e-10);
    }
}
