//! The trivialized disc bundle over a base disc, in binary64.
//!
//! Coordinates are `(P, ζ, R, θ)` with `P = ρ²` the squared base radius,
//! `R = r²` the squared fiber radius and both angles in ℝ/ℤ. The connection
//! form is gauge-fixed to `α = a dθ − γP dζ`, which gives
//!
//! ```text
//! ω = (1 − γR) dP∧dζ + a dR∧dθ − γP dR∧dζ
//! λ = (1 − R)(a dθ − γP dζ) − (1 − γ) P dζ        (dλ = −ω)
//! X = (1 − R) ∂_R − (1 − γ)/(1 − γR) · P ∂_P      (ι_X ω = λ)
//! Φ(P, ζ, R, θ) = ((1 − γR) P, ζ, aR, θ)          (Φ*ω_st = ω)
//! ```
//!
//! Under Φ the Liouville field becomes `(a − R') ∂_R' − P' ∂_P'`, whose
//! basin of attraction from the base disc of area `A − δ` is the ellipsoid
//! `E(A − δ, a)`.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fd::{self, Mat4, Vec4};
use crate::ode;
use crate::par::{self, Execution};

pub const P: usize = 0;
pub const ZETA: usize = 1;
pub const R: usize = 2;
pub const THETA: usize = 3;

const SINGULAR_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiscBundleChart {
    /// Fiber weight.
    pub a: f64,
    pub gamma: f64,
    /// Area of the base disc.
    pub base_area: f64,
    /// Shrinkage of the base disc.
    pub delta: f64,
}

impl DiscBundleChart {
    pub fn new(a: f64, gamma: f64, base_area: f64, delta: f64) -> Result<Self> {
        let finite = [a, gamma, base_area, delta].iter().all(|x| x.is_finite());
        if !finite || a <= 0.0 || base_area <= 0.0 || delta < 0.0 || base_area - delta <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "chart needs a > 0, A > 0, delta >= 0, A - delta > 0 (a={a}, gamma={gamma}, A={base_area}, delta={delta})"
            )));
        }
        Ok(Self { a, gamma, base_area, delta })
    }

    /// Area of the shrunk base disc, `A − δ`.
    pub fn shrunk_area(&self) -> f64 {
        self.base_area - self.delta
    }

    fn check_domain(&self, x: &Vec4) -> Result<()> {
        if !x.iter().all(|c| c.is_finite()) {
            return Err(Error::OutOfDomain("non-finite coordinate".into()));
        }
        if x[P] < 0.0 || x[R] < 0.0 || x[R] > 1.0 {
            return Err(Error::OutOfDomain(format!(
                "need P >= 0 and 0 <= R <= 1, got P={}, R={}",
                x[P], x[R]
            )));
        }
        Ok(())
    }

    /// Coefficient matrix of ω (`Ω[i][j]` is the coefficient of `dx_i∧dx_j`).
    pub fn omega_matrix(&self, x: &Vec4) -> Mat4 {
        let mut m = [[0.0; 4]; 4];
        set(&mut m, P, ZETA, 1.0 - self.gamma * x[R]);
        set(&mut m, R, THETA, self.a);
        set(&mut m, R, ZETA, -self.gamma * x[P]);
        m
    }

    pub fn lambda_coeffs(&self, x: &Vec4) -> Vec4 {
        let mut l = [0.0; 4];
        l[ZETA] = -(1.0 - x[R]) * self.gamma * x[P] - (1.0 - self.gamma) * x[P];
        l[THETA] = self.a * (1.0 - x[R]);
        l
    }

    pub fn alpha_coeffs(&self, x: &Vec4) -> Vec4 {
        let mut l = [0.0; 4];
        l[ZETA] = -self.gamma * x[P];
        l[THETA] = self.a;
        l
    }

    pub fn forms_at(&self, p: &ChartPoint) -> Result<Forms> {
        let x = p.coords();
        self.check_domain(&x)?;
        Ok(Forms {
            omega: TwoForm(self.omega_matrix(&x)),
            lambda: OneForm(self.lambda_coeffs(&x)),
            alpha: OneForm(self.alpha_coeffs(&x)),
        })
    }

    /// Liouville field `X_λ` as `(Ṗ, ζ̇, Ṙ, θ̇)`.
    pub fn liouville_field(&self, p: &ChartPoint) -> Result<Vec4> {
        let x = p.coords();
        let denom = 1.0 - self.gamma * x[R];
        if denom.abs() < SINGULAR_TOL {
            return Err(Error::SingularLocus);
        }
        self.check_domain(&x)?;
        let mut v = [0.0; 4];
        v[R] = 1.0 - x[R];
        v[P] = -(1.0 - self.gamma) / denom * x[P];
        Ok(v)
    }

    pub fn phi_map(&self, p: &ChartPoint) -> Result<ImagePoint> {
        let x = p.coords();
        self.check_domain(&x)?;
        Ok(ImagePoint::from_coords(self.phi_coords(&x)))
    }

    fn phi_coords(&self, x: &Vec4) -> Vec4 {
        [(1.0 - self.gamma * x[R]) * x[P], x[ZETA], self.a * x[R], x[THETA]]
    }

    /// Max entry of `Jᵀ ω_st J − ω` with `J` the finite-difference Jacobian
    /// of Φ at `p`.
    pub fn pullback_defect(&self, p: &ChartPoint, h: f64) -> Result<f64> {
        let x = p.coords();
        self.check_domain(&x)?;
        if !(h > 0.0 && h.is_finite()) || x[P] - h < 0.0 || x[R] - h < 0.0 || x[R] + h > 1.0 {
            return Err(Error::StepTooLarge { step: h, detail: format!("{p:?}") });
        }
        let jac = fd::jacobian(|y| self.phi_coords(y), &x, h);
        let image = self.phi_coords(&x);
        let pulled = pullback(&standard_omega(&image), &jac);
        Ok(fd::max_abs_diff(&pulled, &self.omega_matrix(&x)))
    }

    /// Max entry of `ι_X ω − λ`, both evaluated from their closed forms.
    pub fn liouville_defect(&self, p: &ChartPoint) -> Result<f64> {
        let forms = self.forms_at(p)?;
        let field = self.liouville_field(p)?;
        let contracted = forms.omega.contract(&field);
        Ok(contracted
            .0
            .iter()
            .zip(&forms.lambda.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Max entry of `dλ + ω` with `dλ` by central differences of step `h`.
    pub fn exactness_defect(&self, p: &ChartPoint, h: f64) -> Result<f64> {
        let x = p.coords();
        self.check_domain(&x)?;
        let d = fd::exterior_derivative(|y| self.lambda_coeffs(y), &x, h);
        let omega = self.omega_matrix(&x);
        let mut sum = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                sum[i][j] = d[i][j] + omega[i][j];
            }
        }
        Ok(fd::max_abs_diff(&sum, &[[0.0; 4]; 4]))
    }

    /// The pushed-forward field `(a − R') ∂_R' − P' ∂_P'` (angular part 0).
    pub fn pushed_field(&self, q: &Vec4) -> Vec4 {
        [-q[P], 0.0, self.a - q[R], 0.0]
    }

    /// Closed-form time-`t` flow of the pushed-forward field.
    pub fn flow_closed_form(&self, q: &ImagePoint, t: f64) -> ImagePoint {
        let decay = (-t).exp();
        ImagePoint {
            p: q.p * decay,
            zeta: q.zeta,
            r: self.a - (self.a - q.r) * decay,
            theta: q.theta,
        }
    }

    pub fn flow_rk4(&self, q: &ImagePoint, t: f64, dt: f64) -> ImagePoint {
        let y = ode::rk4_integrate(&|y: &Vec4| self.pushed_field(y), q.coords(), t, dt);
        ImagePoint::from_coords(y)
    }

    /// Membership of an image point in the basin of the shrunk base disc,
    /// decided twice: by the ellipsoid inequality and by flowing back to the
    /// zero-section.
    pub fn basin_membership(&self, q: &ImagePoint) -> Result<BasinMembership> {
        if self.gamma < 0.0 {
            return Err(Error::UnsupportedRegime(
                "basin test needs gamma >= 0 (negative gamma gives a hyperboloid)".into(),
            ));
        }
        if !(q.p >= 0.0 && q.r >= 0.0 && q.p.is_finite() && q.r.is_finite()) {
            return Err(Error::OutOfDomain(format!("image point needs P', R' >= 0, got {q:?}")));
        }
        let level = q.r / self.a + q.p / self.shrunk_area();
        let analytic = level < 1.0;

        let (dynamic, entry_base, boundary_case) = if q.r >= self.a {
            (false, None, true)
        } else {
            // R'(t0) = 0 for e^{-t0} = a / (a − R'), i.e. t0 ≤ 0.
            let t0 = ((self.a - q.r) / self.a).ln();
            let at_zero_section = self.flow_closed_form(q, t0);
            (at_zero_section.p < self.shrunk_area(), Some(at_zero_section.p), false)
        };
        Ok(BasinMembership { analytic, dynamic, level, entry_base, boundary_case })
    }

    /// Monte Carlo volume of the basin, measured in chart coordinates with
    /// the density of `ω∧ω/2`. The sampling box is
    /// `[0, A − δ) × [0,1) × [0,1) × [0,1)`, which contains the basin when
    /// `0 ≤ γ ≤ 1`.
    pub fn basin_volume_mc(&self, samples: usize, seed: u64, exec: Execution) -> Result<MonteCarlo> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::UnsupportedRegime(
                "Monte Carlo basin volume needs 0 <= gamma <= 1".into(),
            ));
        }
        let box_base = self.shrunk_area();
        let ranges = par::chunk_ranges(samples, par::SAMPLING_CHUNKS);
        let sums = par::map_indexed(ranges.len(), exec, |c| {
            let mut rng = par::chunk_rng(seed, c);
            let (mut s, mut s2) = (0.0f64, 0.0f64);
            for _ in ranges[c].clone() {
                let x: Vec4 = [
                    rng.random::<f64>() * box_base,
                    rng.random::<f64>(),
                    rng.random::<f64>(),
                    rng.random::<f64>(),
                ];
                let q = ImagePoint::from_coords(self.phi_coords(&x));
                let inside = q.r / self.a + q.p / box_base < 1.0;
                let v = if inside { pfaffian(&self.omega_matrix(&x)) } else { 0.0 };
                s += v;
                s2 += v * v;
            }
            (s, s2)
        });
        let (s, s2) = sums.iter().fold((0.0, 0.0), |acc, x| (acc.0 + x.0, acc.1 + x.1));
        let n = samples as f64;
        let mean = s / n;
        let var = (s2 / n - mean * mean).max(0.0);
        Ok(MonteCarlo {
            estimate: box_base * mean,
            std_error: box_base * (var / n).sqrt(),
            expected: box_base * self.a / 2.0,
            samples,
        })
    }
}

fn set(m: &mut Mat4, i: usize, j: usize, v: f64) {
    m[i][j] = v;
    m[j][i] = -v;
}

/// `ω_st = dP'∧dζ' + dR'∧dθ'`. Constant; the argument marks where it is
/// evaluated.
pub fn standard_omega(_at: &Vec4) -> Mat4 {
    let mut m = [[0.0; 4]; 4];
    set(&mut m, P, ZETA, 1.0);
    set(&mut m, R, THETA, 1.0);
    m
}

/// `Jᵀ Ω J`.
pub fn pullback(omega: &Mat4, jac: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut s = 0.0;
            for k in 0..4 {
                for l in 0..4 {
                    s += jac[k][i] * omega[k][l] * jac[l][j];
                }
            }
            out[i][j] = s;
        }
    }
    out
}

/// Pfaffian of a 4×4 antisymmetric matrix: the density of `ω∧ω/2`.
pub fn pfaffian(m: &Mat4) -> f64 {
    m[0][1] * m[2][3] - m[0][2] * m[1][3] + m[0][3] * m[1][2]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChartPoint {
    pub p: f64,
    pub zeta: f64,
    pub r: f64,
    pub theta: f64,
}

impl ChartPoint {
    pub fn new(p: f64, zeta: f64, r: f64, theta: f64) -> Self {
        Self { p, zeta, r, theta }
    }

    pub fn coords(&self) -> Vec4 {
        [self.p, self.zeta, self.r, self.theta]
    }

    pub fn from_coords(x: Vec4) -> Self {
        Self::new(x[0], x[1], x[2], x[3])
    }
}

/// A point of `ℂ²` in coordinates `(P' = |z'|², ζ', R' = |w'|², θ')`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ImagePoint {
    pub p: f64,
    pub zeta: f64,
    pub r: f64,
    pub theta: f64,
}

impl ImagePoint {
    pub fn new(p: f64, zeta: f64, r: f64, theta: f64) -> Self {
        Self { p, zeta, r, theta }
    }

    pub fn coords(&self) -> Vec4 {
        [self.p, self.zeta, self.r, self.theta]
    }

    pub fn from_coords(x: Vec4) -> Self {
        Self::new(x[0], x[1], x[2], x[3])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TwoForm(pub Mat4);

impl TwoForm {
    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    /// `ι_v ω`, the covector `w ↦ ω(v, w)`.
    pub fn contract(&self, v: &Vec4) -> OneForm {
        let mut out = [0.0; 4];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = (0..4).map(|i| v[i] * self.0[i][k]).sum();
        }
        OneForm(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OneForm(pub Vec4);

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Forms {
    pub omega: TwoForm,
    pub lambda: OneForm,
    pub alpha: OneForm,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BasinMembership {
    /// `R'/a + P'/(A − δ) < 1`.
    pub analytic: bool,
    /// Backward flow reaches `R' = 0` with `P' < A − δ`.
    pub dynamic: bool,
    /// `R'/a + P'/(A − δ)`.
    pub level: f64,
    /// `P'` where the backward flow meets the zero-section.
    pub entry_base: Option<f64>,
    /// `R' ≥ a`: the backward flow never reaches the zero-section.
    pub boundary_case: bool,
}

impl BasinMembership {
    pub fn agree(&self) -> bool {
        self.analytic == self.dynamic
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MonteCarlo {
    pub estimate: f64,
    pub std_error: f64,
    pub expected: f64,
    pub samples: usize,
}

impl MonteCarlo {
    pub fn relative_error(&self) -> f64 {
        ((self.estimate - self.expected) / self.expected).abs()
    }
}

/// C¹ profile for the plumbing primitive: `f(R) = R` up to `ε/2`, then a
/// cubic Hermite blend `ε/2 + (ε/2)(s + s² − s³)` reaching `ε` with zero
/// slope at `R = ε`, and `f ≡ ε` beyond.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PlumbingProfile {
    pub epsilon: f64,
}

impl PlumbingProfile {
    pub fn value(&self, r: f64) -> f64 {
        let half = self.epsilon / 2.0;
        if r <= half {
            r
        } else if r >= self.epsilon {
            self.epsilon
        } else {
            let s = (r - half) / half;
            half + half * (s + s * s - s * s * s)
        }
    }

    pub fn slope(&self, r: f64) -> f64 {
        let half = self.epsilon / 2.0;
        if r <= half {
            1.0
        } else if r >= self.epsilon {
            0.0
        } else {
            let s = (r - half) / half;
            1.0 + 2.0 * s - 3.0 * s * s
        }
    }
}

/// Coordinates `(R_i, θ_i, R_j, θ_j)` on the plumbing disc around an
/// intersection point of curves `i` and `j`, seen from the bundle over `i`.
///
/// `ω = a_i dR_i∧dθ_i + a_j f'(R_j) dR_j∧dθ_j` (the `τ_ij` part with
/// `τ_ij = a_j df∧dθ_j`) and
/// `λ = a_i (1 − R_i) dθ_i + ((1 − ε) a_j + a_j (ε − f(R_j))) dθ_j`,
/// where `a_j (ε − f) dθ_j` is the plumbing primitive, zero for `R_j ≥ ε`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PlumbingChart {
    pub a_i: f64,
    pub a_j: f64,
    pub profile: PlumbingProfile,
}

pub const RI: usize = 0;
pub const THETA_I: usize = 1;
pub const RJ: usize = 2;
pub const THETA_J: usize = 3;

impl PlumbingChart {
    pub fn new(a_i: f64, a_j: f64, epsilon: f64) -> Result<Self> {
        if !(a_i > 0.0 && a_j > 0.0 && epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidInput(
                "plumbing chart needs a_i, a_j > 0 and 0 < epsilon < 1".into(),
            ));
        }
        Ok(Self { a_i, a_j, profile: PlumbingProfile { epsilon } })
    }

    pub fn epsilon(&self) -> f64 {
        self.profile.epsilon
    }

    pub fn omega_matrix(&self, x: &Vec4) -> Mat4 {
        let mut m = [[0.0; 4]; 4];
        set(&mut m, RI, THETA_I, self.a_i);
        set(&mut m, RJ, THETA_J, self.a_j * self.profile.slope(x[RJ]));
        m
    }

    pub fn lambda_coeffs(&self, x: &Vec4) -> Vec4 {
        let eps = self.epsilon();
        let mut l = [0.0; 4];
        l[THETA_I] = self.a_i * (1.0 - x[RI]);
        l[THETA_J] = (1.0 - eps) * self.a_j + self.plumbing_primitive(x[RJ]);
        l
    }

    /// `a_j (ε − f(R_j))`, the `dθ_j` coefficient of the plumbing primitive.
    pub fn plumbing_primitive(&self, rj: f64) -> f64 {
        self.a_j * (self.epsilon() - self.profile.value(rj))
    }

    /// Liouville field where ω is nondegenerate (`R_j < ε`).
    pub fn liouville_field(&self, x: &Vec4) -> Result<Vec4> {
        let slope = self.profile.slope(x[RJ]);
        if slope <= 0.0 {
            return Err(Error::OutOfDomain("plumbing form degenerates for R_j >= epsilon".into()));
        }
        let l = self.lambda_coeffs(x);
        let mut v = [0.0; 4];
        v[RI] = l[THETA_I] / self.a_i;
        v[RJ] = l[THETA_J] / (self.a_j * slope);
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart(a: f64, gamma: f64) -> DiscBundleChart {
        DiscBundleChart::new(a, gamma, 3.0, 0.1).unwrap()
    }

    #[test]
    fn split_form_when_gamma_vanishes() {
        let c = chart(0.7, 0.0);
        let f = c.forms_at(&ChartPoint::new(0.4, 0.2, 0.3, 0.9)).unwrap();
        let mut expected = [[0.0; 4]; 4];
        set(&mut expected, P, ZETA, 1.0);
        set(&mut expected, R, THETA, 0.7);
        assert_eq!(f.omega.0, expected);
    }

    #[test]
    fn form_coefficients_at_sample_point() {
        let c = chart(1.0 / 3.0, 0.5);
        let f = c.forms_at(&ChartPoint::new(0.5, 0.0, 0.5, 0.0)).unwrap();
        assert!((f.omega.coeff(P, ZETA) - 0.75).abs() < 1e-15);
        // dR∧dζ coefficient is −γP.
        assert!((f.omega.coeff(R, ZETA) + 0.25).abs() < 1e-15);
        assert!((f.omega.coeff(R, THETA) - 1.0 / 3.0).abs() < 1e-15);
        assert!((f.alpha.0[ZETA] + 0.25).abs() < 1e-15);
    }

    #[test]
    fn lambda_fiber_part_vanishes_on_unit_circle() {
        let c = chart(2.0, 0.5);
        let f = c.forms_at(&ChartPoint::new(1.2, 0.0, 1.0, 0.0)).unwrap();
        assert_eq!(f.lambda.0[THETA], 0.0);
    }

    #[test]
    fn out_of_domain_points() {
        let c = chart(1.0, 0.0);
        assert!(matches!(c.forms_at(&ChartPoint::new(-0.1, 0.0, 0.5, 0.0)), Err(Error::OutOfDomain(_))));
        assert!(matches!(c.forms_at(&ChartPoint::new(0.1, 0.0, 1.5, 0.0)), Err(Error::OutOfDomain(_))));
        assert!(c.phi_map(&ChartPoint::new(f64::NAN, 0.0, 0.5, 0.0)).is_err());
    }

    #[test]
    fn field_examples() {
        let c = chart(1.0, 0.5);
        let v = c.liouville_field(&ChartPoint::new(2.0, 0.0, 0.0, 0.0)).unwrap();
        assert_eq!(v[R], 1.0);
        let v = chart(1.0, 0.0).liouville_field(&ChartPoint::new(1.0, 0.0, 0.3, 0.0)).unwrap();
        assert_eq!(v[P], -1.0);
        let v = c.liouville_field(&ChartPoint::new(2.0, 0.0, 0.5, 0.0)).unwrap();
        assert!((v[P] + 4.0 / 3.0).abs() < 1e-15);
        assert_eq!((v[ZETA], v[THETA]), (0.0, 0.0));
    }

    #[test]
    fn field_singular_locus() {
        let c = DiscBundleChart::new(1.0, 2.0, 3.0, 0.0).unwrap();
        assert_eq!(c.liouville_field(&ChartPoint::new(1.0, 0.0, 0.5, 0.0)), Err(Error::SingularLocus));
    }

    #[test]
    fn phi_examples() {
        let id = chart(1.0, 0.0);
        let p = ChartPoint::new(0.4, 0.1, 0.6, 0.2);
        assert_eq!(id.phi_map(&p).unwrap().coords(), p.coords());

        let c = chart(1.0 / 3.0, 0.5);
        let img = c.phi_map(&ChartPoint::new(0.5, 0.0, 0.5, 0.0)).unwrap();
        assert!((img.p - 0.375).abs() < 1e-15);
        assert!((img.r - 1.0 / 6.0).abs() < 1e-15);

        let img = c.phi_map(&ChartPoint::new(0.8, 0.3, 0.0, 0.6)).unwrap();
        assert_eq!((img.p, img.r), (0.8, 0.0));
    }

    #[test]
    fn pullback_defect_small() {
        let d = chart(1.0, 0.0)
            .pullback_defect(&ChartPoint::new(0.5, 0.2, 0.4, 0.1), 1e-5)
            .unwrap();
        assert!(d < 1e-9, "{d}");
        let c = chart(1.0 / 3.0, 0.5);
        let p = ChartPoint::new(0.5, 0.3, 0.5, 0.7);
        let d1 = c.pullback_defect(&p, 1e-5).unwrap();
        let d2 = c.pullback_defect(&p, 5e-6).unwrap();
        assert!(d1 <= 1e-8 && d2 <= 1e-8, "{d1} {d2}");
    }

    #[test]
    fn pullback_detects_wrong_map() {
        // Dropping the (1 − γR) factor on P' breaks the symplectic condition.
        let c = chart(1.0 / 3.0, 0.5);
        let x = [0.5, 0.3, 0.5, 0.7];
        let jac = fd::jacobian(|y| [y[P], y[ZETA], c.a * y[R], y[THETA]], &x, 1e-5);
        let pulled = pullback(&standard_omega(&x), &jac);
        assert!(fd::max_abs_diff(&pulled, &c.omega_matrix(&x)) > 0.1);
    }

    #[test]
    fn pullback_step_checks() {
        let c = chart(1.0, 0.5);
        assert!(matches!(
            c.pullback_defect(&ChartPoint::new(1e-6, 0.0, 0.5, 0.0), 1e-5),
            Err(Error::StepTooLarge { .. })
        ));
        assert!(c.pullback_defect(&ChartPoint::new(0.5, 0.0, 0.5, 0.0), 0.0).is_err());
    }

    #[test]
    fn liouville_and_exactness_identities() {
        for gamma in [-1.0, 0.0, 0.5] {
            let c = chart(1.0 / 3.0, gamma);
            let p = ChartPoint::new(1.3, 0.4, 0.35, 0.8);
            assert!(c.liouville_defect(&p).unwrap() < 1e-12);
            assert!(c.exactness_defect(&p, 1e-4).unwrap() < 1e-6);
        }
    }

    #[test]
    fn symplectic_density() {
        let c = chart(2.0, 0.5);
        let x = [0.7, 0.0, 0.4, 0.0];
        assert!((pfaffian(&c.omega_matrix(&x)) - 2.0 * (1.0 - 0.2)).abs() < 1e-15);
    }

    #[test]
    fn flow_examples() {
        let c = chart(1.0 / 3.0, 0.5);
        let q = ImagePoint::new(1.0, 0.2, 0.0, 0.4);
        assert_eq!(c.flow_closed_form(&q, 0.0), q);
        let f = c.flow_closed_form(&q, 2f64.ln());
        assert!((f.r - 1.0 / 6.0).abs() < 1e-15 && (f.p - 0.5).abs() < 1e-15);
        let f = c.flow_closed_form(&q, 60.0);
        assert!((f.r - 1.0 / 3.0).abs() < 1e-15 && f.p < 1e-25);
        let rk = c.flow_rk4(&q, 2f64.ln(), 1e-3);
        assert!((rk.r - 1.0 / 6.0).abs() < 1e-10 && (rk.p - 0.5).abs() < 1e-10);
    }

    #[test]
    fn basin_examples() {
        let c = DiscBundleChart::new(1.0 / 3.0, 0.5, 3.0, 0.1).unwrap();
        let m = c.basin_membership(&ImagePoint::new(1.0, 0.0, 0.1, 0.0)).unwrap();
        assert!(m.analytic && m.dynamic);
        assert!((m.level - (0.3 + 1.0 / 2.9)).abs() < 1e-12);
        assert!((m.entry_base.unwrap() - 1.0 / 0.7).abs() < 1e-12);

        let m = c.basin_membership(&ImagePoint::new(0.0, 0.0, 0.0, 0.0)).unwrap();
        assert!(m.analytic && m.dynamic);

        // Level 1.2: R'/a = 0.6, P'/(A − δ) = 0.6.
        let m = c.basin_membership(&ImagePoint::new(0.6 * 2.9, 0.0, 0.2, 0.0)).unwrap();
        assert!(!m.analytic && !m.dynamic);

        let m = c.basin_membership(&ImagePoint::new(0.1, 0.0, 0.5, 0.0)).unwrap();
        assert!(m.boundary_case && !m.analytic && !m.dynamic);
    }

    #[test]
    fn basin_refuses_hyperboloid() {
        let c = chart(1.0, -1.0);
        assert!(matches!(
            c.basin_membership(&ImagePoint::new(0.1, 0.0, 0.1, 0.0)),
            Err(Error::UnsupportedRegime(_))
        ));
    }

    #[test]
    fn basin_lies_over_shrunk_disc() {
        // Inside points have P' < A − δ, and P = P'/(1 − γR) stays below A − δ
        // for γ ≤ 1 along the preimage.
        let c = chart(0.5, 0.5);
        for i in 0..50 {
            for j in 0..50 {
                let p = ChartPoint::new(2.9 * i as f64 / 50.0, 0.0, j as f64 / 50.0, 0.0);
                let img = c.phi_map(&p).unwrap();
                if c.basin_membership(&img).unwrap().analytic {
                    assert!(p.p < c.shrunk_area());
                }
            }
        }
    }

    #[test]
    fn small_monte_carlo() {
        let c = chart(1.0 / 3.0, 0.5);
        let mc = c.basin_volume_mc(20_000, 3, Execution::Sequential).unwrap();
        assert!(mc.relative_error() < 5.0 * mc.std_error / mc.expected + 1e-3);
        let par = c.basin_volume_mc(20_000, 3, Execution::Parallel).unwrap();
        assert_eq!(mc, par);
    }

    #[test]
    fn plumbing_profile_shape() {
        let f = PlumbingProfile { epsilon: 0.2 };
        assert_eq!(f.value(0.05), 0.05);
        assert_eq!(f.value(0.3), 0.2);
        assert!((f.value(0.2 - 1e-12) - 0.2).abs() < 1e-10);
        assert!((f.value(0.1 + 1e-12) - 0.1).abs() < 1e-10);
        for k in 0..=100 {
            let r = 0.1 + 0.1 * k as f64 / 100.0;
            assert!(f.slope(r) >= 0.0);
            // slope matches a difference quotient of value
            let h = 1e-7;
            if r > 0.1 + h && r < 0.2 - h {
                let dq = (f.value(r + h) - f.value(r - h)) / (2.0 * h);
                assert!((dq - f.slope(r)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn plumbing_near_intersection_point() {
        let c = PlumbingChart::new(1.0 / 3.0, 1.0 / 6.0, 0.2).unwrap();
        let x = [0.03, 0.4, 0.04, 0.9];
        let mut split = [[0.0; 4]; 4];
        set(&mut split, RI, THETA_I, 1.0 / 3.0);
        set(&mut split, RJ, THETA_J, 1.0 / 6.0);
        assert_eq!(c.omega_matrix(&x), split);
        let l = c.lambda_coeffs(&x);
        assert!((l[THETA_I] - (1.0 / 3.0) * (1.0 - 0.03)).abs() < 1e-15);
        assert!((l[THETA_J] - (1.0 / 6.0) * (1.0 - 0.04)).abs() < 1e-15);
        let v = c.liouville_field(&x).unwrap();
        assert!((v[RI] - 0.97).abs() < 1e-15 && (v[RJ] - 0.96).abs() < 1e-15);
    }

    #[test]
    fn plumbing_primitive_support_and_mass() {
        let c = PlumbingChart::new(1.0, 0.5, 0.2).unwrap();
        assert_eq!(c.plumbing_primitive(0.2), 0.0);
        assert_eq!(c.plumbing_primitive(0.7), 0.0);
        // ∫ a_j f'(R_j) dR_j (θ_j integrates to 1) = a_j ε.
        let n = 20_000;
        let mass: f64 = (0..n)
            .map(|k| {
                let r = 0.3 * (k as f64 + 0.5) / n as f64;
                c.a_j * c.profile.slope(r) * 0.3 / n as f64
            })
            .sum();
        assert!((mass - 0.5 * 0.2).abs() < 1e-6);
        for rj in [0.01, 0.12, 0.17, 0.25] {
            let x = [0.3, 0.0, rj, 0.0];
            let d = fd::exterior_derivative(|y| c.lambda_coeffs(y), &x, 1e-6);
            let w = c.omega_matrix(&x);
            let mut sum = [[0.0; 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    sum[i][j] = d[i][j] + w[i][j];
                }
            }
            assert!(fd::max_abs_diff(&sum, &[[0.0; 4]; 4]) < 1e-6);
        }
    }
}
