//! Central finite differences on ℝ⁴.

pub type Vec4 = [f64; 4];
pub type Mat4 = [[f64; 4]; 4];

/// `J[i][j] = ∂f_i/∂x_j`, central differences with step `h`.
pub fn jacobian<F: Fn(&Vec4) -> Vec4>(f: F, x: &Vec4, h: f64) -> Mat4 {
    let mut jac = [[0.0; 4]; 4];
    for j in 0..4 {
        let mut plus = *x;
        let mut minus = *x;
        plus[j] += h;
        minus[j] -= h;
        let (fp, fm) = (f(&plus), f(&minus));
        for i in 0..4 {
            jac[i][j] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    jac
}

/// Coefficient matrix of `dλ` for a one-form with coefficient field `lambda`:
/// `D[i][j] = ∂_i λ_j − ∂_j λ_i`.
pub fn exterior_derivative<F: Fn(&Vec4) -> Vec4>(lambda: F, x: &Vec4, h: f64) -> Mat4 {
    // jac[i][j] = ∂_j λ_i
    let jac = jacobian(lambda, x, h);
    let mut d = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            d[i][j] = jac[j][i] - jac[i][j];
        }
    }
    d
}

pub fn max_abs_diff(a: &Mat4, b: &Mat4) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trig(x: &Vec4) -> Vec4 {
        [x[0].sin() * x[1], x[2].exp(), x[3] * x[3] * x[3], x[0] * x[2]]
    }

    fn exact_trig_jacobian(x: &Vec4) -> Mat4 {
        [
            [x[0].cos() * x[1], x[0].sin(), 0.0, 0.0],
            [0.0, 0.0, x[2].exp(), 0.0],
            [0.0, 0.0, 0.0, 3.0 * x[3] * x[3]],
            [x[2], 0.0, x[0], 0.0],
        ]
    }

    #[test]
    fn jacobian_is_second_order() {
        let x = [0.3, 0.7, -0.2, 1.1];
        let exact = exact_trig_jacobian(&x);
        let e1 = max_abs_diff(&jacobian(trig, &x, 1e-2), &exact);
        let e2 = max_abs_diff(&jacobian(trig, &x, 5e-3), &exact);
        let ratio = e1 / e2;
        assert!((3.8..4.2).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn d_of_exact_form_vanishes() {
        // λ = d(x0 x1 x2 + sin x3)
        let grad = |x: &Vec4| [x[1] * x[2], x[0] * x[2], x[0] * x[1], x[3].cos()];
        let d = exterior_derivative(grad, &[0.4, 0.1, 0.9, 0.5], 1e-4);
        assert!(max_abs_diff(&d, &[[0.0; 4]; 4]) < 1e-8);
    }
}
