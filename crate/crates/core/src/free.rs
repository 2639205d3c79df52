//! The constant-potential operator `h = −iσ₁∂ₓ + [[v, a], [a*, w]]`: band
//! edges, `κ_E`, the fundamental solutions and plane-wave scattering states.

use num_complex::Complex64 as C64;
use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::dirac::{make_operator, DiracOperator};
use crate::error::{Error, Result};
use crate::field::{MatrixField, SpinorField};
use crate::numerics::{max_abs, Mat2, Vector, I};
use crate::pauli::sigma1;

/// Entries `v`, `w` (real) and `a` (complex) of the constant potential.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FreeParams {
    pub v: f64,
    pub w: f64,
    pub a: C64,
}

/// Energy interval `(ε₋, ε₊)` on which `κ_E` is real.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub eps_minus: f64,
    pub eps_plus: f64,
}

impl Band {
    /// Strictly inside `(ε₋, ε₊)`.
    pub fn contains(&self, e: f64) -> bool {
        self.eps_minus < e && e < self.eps_plus
    }
}

/// `γ = −iσ₁` shared by all 2x2 operators.
pub fn gamma2() -> Mat2 {
    sigma1() * -I
}

impl FreeParams {
    pub fn new(v: f64, w: f64, a: C64) -> Self {
        FreeParams { v, w, a }
    }

    pub fn validate(&self) -> Result<()> {
        if [self.v, self.w, self.a.re, self.a.im].iter().all(|p| p.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidParameter("free parameters must be finite".into()))
        }
    }

    pub fn matrix(&self) -> Mat2 {
        Mat2::new(C64::new(self.v, 0.0), self.a, self.a.conj(), C64::new(self.w, 0.0))
    }

    pub fn operator(&self) -> DiracOperator<2> {
        make_operator(gamma2(), MatrixField::constant(self.matrix())).expect("−iσ₁ is a valid gamma")
    }

    /// Symbol `h(k) = [[v, k + a], [k + a*, w]]` acting on `e^{ikx}u`.
    pub fn symbol(&self, k: f64) -> Mat2 {
        Mat2::new(C64::new(self.v, 0.0), k + self.a, k + self.a.conj(), C64::new(self.w, 0.0))
    }
}

pub fn band_edges(p: &FreeParams) -> Band {
    let b = p.a.im;
    let root = ((p.v - p.w).powi(2) + 4.0 * b * b).sqrt();
    Band { eps_minus: 0.5 * (p.v + p.w - root), eps_plus: 0.5 * (p.v + p.w + root) }
}

/// `κ_E² = (Im a)² − (v − E)(w − E)`.
pub fn kappa_squared(e: f64, p: &FreeParams) -> f64 {
    p.a.im * p.a.im - (p.v - e) * (p.w - e)
}

/// Principal root: `κ ≥ 0` on the band, `κ ∈ i·ℝ₊` outside.
pub fn kappa(e: f64, p: &FreeParams) -> C64 {
    let k2 = kappa_squared(e, p);
    if k2 >= 0.0 {
        C64::new(k2.sqrt(), 0.0)
    } else {
        C64::new(0.0, (-k2).sqrt())
    }
}

/// The fundamental solutions `ψ_E`, `ψ̄_E` translated by `delta`.
#[derive(Clone, Debug)]
pub struct SolutionPair {
    pub psi: SpinorField<2>,
    pub psi_bar: SpinorField<2>,
    pub energy: f64,
    pub kappa: C64,
    pub delta: C64,
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
}

/// `ψ_E(x + δ) = e^{−i Re a (x+δ)} (cosh κy, i(Im a cosh κy + κ sinh κy)/(w − E))`, `y = x + δ`.
pub fn fundamental_psi(e: f64, p: &FreeParams, delta: C64) -> Result<SpinorField<2>> {
    if near(e, p.w) {
        return Err(Error::Pole(format!("psi has a pole at E = w = {}", p.w)));
    }
    let (k, b, r, coef) = (kappa(e, p), p.a.im, p.a.re, I / (p.w - e));
    let value = move |x: f64| {
        let y = x + delta;
        let (ch, sh, ph) = ((k * y).cosh(), (k * y).sinh(), (-I * r * y).exp());
        Vector2::new(ph * ch, ph * coef * (b * ch + k * sh))
    };
    let derivative = move |x: f64| {
        let y = x + delta;
        let (ch, sh, ph) = ((k * y).cosh(), (k * y).sinh(), (-I * r * y).exp());
        let f = Vector2::new(ch, coef * (b * ch + k * sh));
        let df = Vector2::new(k * sh, coef * (b * k * sh + k * k * ch));
        (df - f * (I * r)) * ph
    };
    Ok(SpinorField::with_derivative(value, derivative))
}

/// `ψ̄_E(x + δ) = e^{−i Re a (x+δ)} (i(−Im a cosh κy + κ sinh κy)/(v − E), cosh κy)`.
pub fn fundamental_psi_bar(e: f64, p: &FreeParams, delta: C64) -> Result<SpinorField<2>> {
    if near(e, p.v) {
        return Err(Error::Pole(format!("psi_bar has a pole at E = v = {}", p.v)));
    }
    let (k, b, r, coef) = (kappa(e, p), p.a.im, p.a.re, I / (p.v - e));
    let value = move |x: f64| {
        let y = x + delta;
        let (ch, sh, ph) = ((k * y).cosh(), (k * y).sinh(), (-I * r * y).exp());
        Vector2::new(ph * coef * (-b * ch + k * sh), ph * ch)
    };
    let derivative = move |x: f64| {
        let y = x + delta;
        let (ch, sh, ph) = ((k * y).cosh(), (k * y).sinh(), (-I * r * y).exp());
        let f = Vector2::new(coef * (-b * ch + k * sh), ch);
        let df = Vector2::new(coef * (-b * k * sh + k * k * ch), k * sh);
        (df - f * (I * r)) * ph
    };
    Ok(SpinorField::with_derivative(value, derivative))
}

/// Both fundamental solutions; fails if either formula has a pole at `E`.
/// [`fundamental_psi`] and [`fundamental_psi_bar`] give the individual families.
pub fn fundamental_solutions(e: f64, p: &FreeParams, delta: C64) -> Result<SolutionPair> {
    Ok(SolutionPair {
        psi: fundamental_psi(e, p, delta)?,
        psi_bar: fundamental_psi_bar(e, p, delta)?,
        energy: e,
        kappa: kappa(e, p),
        delta,
    })
}

/// Residual `|(h − E)ψ(x)|` using the analytic derivative of `ψ`.
pub fn analytic_residual(p: &FreeParams, e: f64, psi: &SpinorField<2>, x: f64) -> f64 {
    let d = psi.derivative_at(x, 1e-4).expect("analytic derivative");
    max_abs(&(gamma2() * d + (p.matrix() - Mat2::identity() * C64::new(e, 0.0)) * psi.at(x)))
}

/// Plane wave `e^{ikx} u` with `(h(k) − E)u = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneWave {
    pub energy: f64,
    pub k: f64,
    pub u: Vector<2>,
}

impl PlaneWave {
    pub fn field(&self) -> SpinorField<2> {
        let (k, u) = (self.k, self.u);
        SpinorField::with_derivative(move |x| u * (I * k * x).exp(), move |x| u * (I * k * (I * k * x).exp()))
    }
}

/// Unit null vector of a 2x2 matrix with vanishing determinant, first nonzero
/// component made real and positive.
pub(crate) fn null_vector2(m: &Mat2) -> Vector<2> {
    let c1 = Vector2::new(m[(0, 1)], -m[(0, 0)]);
    let c2 = Vector2::new(m[(1, 1)], -m[(1, 0)]);
    let u = if c1.norm() >= c2.norm() { c1 } else { c2 };
    let u = if u.norm() == 0.0 { Vector2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0)) } else { u.normalize() };
    let lead = if u[0].norm() > 1e-14 { u[0] } else { u[1] };
    u * (lead.conj() / lead.norm())
}

/// Plane-wave eigensolution moving in `direction` (sign of the group velocity).
///
/// Momenta are `k = −Re a ± Im κ_E`; the sign is fixed by
/// `dE/dk = 2(k + Re a)/(2E − v − w)`.
pub fn scattering_state(e: f64, p: &FreeParams, direction: i32) -> Result<PlaneWave> {
    let band = band_edges(p);
    if !(e < band.eps_minus || e > band.eps_plus) {
        return Err(Error::NotScatteringEnergy {
            energy: e,
            reason: format!("inside the band [{}, {}]", band.eps_minus, band.eps_plus),
        });
    }
    if direction != 1 && direction != -1 {
        return Err(Error::InvalidInput(format!("direction must be ±1, got {direction}")));
    }
    let q = kappa(e, p).im;
    let s = direction as f64 * (2.0 * e - p.v - p.w).signum();
    let k = -p.a.re + s * q;
    let m = p.symbol(k) - Mat2::identity() * C64::new(e, 0.0);
    let u = null_vector2(&m);
    let residual = max_abs(&(m * u));
    if residual > 1e-10 * (1.0 + max_abs(&m)) {
        return Err(Error::NumericalFailure(format!("plane-wave spinor residual {residual:.3e}")));
    }
    Ok(PlaneWave { energy: e, k, u })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::c;
    use proptest::prelude::*;

    fn fig1() -> FreeParams {
        FreeParams::new(-2.0, 5.0, c(0.0, 0.0))
    }

    #[test]
    fn band_edge_examples() {
        let b = band_edges(&fig1());
        assert_eq!((b.eps_minus, b.eps_plus), (-2.0, 5.0));
        let b = band_edges(&FreeParams::new(1.5, 1.5, c(0.7, 0.0)));
        assert_eq!((b.eps_minus, b.eps_plus), (1.5, 1.5));
        assert!(!b.contains(1.5));
        let b = band_edges(&FreeParams::new(-2.0, 5.0, c(0.0, 2.0)));
        assert!((b.eps_minus - (3.0 - 65f64.sqrt()) / 2.0).abs() < 1e-14);
        assert!((b.eps_plus - 5.531_128_874_149_275).abs() < 1e-12);
    }

    #[test]
    fn kappa_examples() {
        assert!((kappa(0.0, &fig1()) - c(10f64.sqrt(), 0.0)).norm() < 1e-14);
        assert_eq!(kappa(5.0, &fig1()), c(0.0, 0.0));
        assert!((kappa(6.0, &fig1()) - c(0.0, 8f64.sqrt())).norm() < 1e-14);
    }

    #[test]
    fn fundamental_solution_examples() {
        let p = FreeParams::new(-2.0, 5.0, c(0.3, 1.1));
        let pair = fundamental_solutions(0.4, &p, c(0.0, 0.0)).unwrap();
        let psi0 = pair.psi.at(0.0);
        assert!((psi0[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((psi0[1] - I * 1.1 / (5.0 - 0.4)).norm() < 1e-15);

        let free = FreeParams::new(0.0, 0.0, c(0.0, 0.0));
        let k = 1.3;
        let pair = fundamental_solutions(k, &free, c(0.0, 0.0)).unwrap();
        assert!((pair.kappa - c(0.0, k)).norm() < 1e-15);
        for x in [-1.0, 0.2, 2.5] {
            let v = pair.psi.at(x);
            assert!((v[0] - c((k * x).cos(), 0.0)).norm() < 1e-13);
            assert!((v[1] - c(0.0, (k * x).sin())).norm() < 1e-13);
        }

        let pair = fundamental_solutions(0.0, &fig1(), c(0.0, 0.0)).unwrap();
        for i in 0..=600 {
            let x = -30.0 + 0.1 * i as f64;
            let scale = pair.psi.at(x).norm().max(pair.psi_bar.at(x).norm());
            assert!(analytic_residual(&fig1(), 0.0, &pair.psi, x) < 1e-10 * scale);
            assert!(analytic_residual(&fig1(), 0.0, &pair.psi_bar, x) < 1e-10 * scale);
        }
    }

    #[test]
    fn poles_are_reported_per_family() {
        let p = fig1();
        assert!(matches!(fundamental_solutions(5.0, &p, c(0.0, 0.0)), Err(Error::Pole(_))));
        assert!(fundamental_psi(5.0, &p, c(0.0, 0.0)).is_err());
        assert!(fundamental_psi_bar(5.0, &p, c(0.0, 0.0)).is_ok());
        assert!(fundamental_psi(-2.0, &p, c(0.0, 0.0)).is_ok());
        assert!(fundamental_psi_bar(-2.0, &p, c(0.0, 0.0)).is_err());
    }

    #[test]
    fn scattering_state_examples() {
        let free = FreeParams::new(0.0, 0.0, c(0.0, 0.0));
        let pw = scattering_state(2.0, &free, 1).unwrap();
        assert_eq!(pw.k, 2.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((pw.u - Vector2::new(c(s, 0.0), c(s, 0.0))).norm() < 1e-15);
        assert!(matches!(scattering_state(1.0, &fig1(), 1), Err(Error::NotScatteringEnergy { .. })));
        let pw = scattering_state(7.0, &fig1(), 1).unwrap();
        let f = pw.field();
        for x in [-3.0, 0.0, 4.0] {
            assert!(analytic_residual(&fig1(), 7.0, &f, x) < 1e-10);
        }
    }

    #[test]
    fn group_velocity_fixes_direction() {
        let p = FreeParams::new(-2.0, 5.0, c(0.8, 0.5));
        for e in [-6.0, 8.0] {
            for dir in [1, -1] {
                let pw = scattering_state(e, &p, dir).unwrap();
                let velocity = (pw.u.adjoint() * sigma1() * pw.u)[(0, 0)].re;
                assert!(velocity * dir as f64 > 0.0, "E={e} dir={dir} velocity={velocity}");
            }
        }
    }

    proptest! {
        #[test]
        fn fundamental_solutions_are_exact(
            v in -4.0..4.0f64, w in -4.0..4.0f64, re_a in -2.0..2.0f64, im_a in -2.0..2.0f64,
            e in -6.0..6.0f64, x in -3.0..3.0f64, d_re in -1.0..1.0f64,
        ) {
            let p = FreeParams::new(v, w, c(re_a, im_a));
            prop_assume!((e - v).abs() > 1e-2 && (e - w).abs() > 1e-2);
            let pair = fundamental_solutions(e, &p, c(d_re, 0.0)).unwrap();
            for f in [&pair.psi, &pair.psi_bar] {
                let scale = f.at(x).norm() + f.derivative_at(x, 1e-4).unwrap().norm();
                prop_assert!(analytic_residual(&p, e, f, x) < 1e-10 * scale.max(1.0));
            }
        }

        #[test]
        fn kappa_real_iff_inside_band(v in -4.0..4.0f64, w in -4.0..4.0f64, im_a in -2.0..2.0f64, e in -8.0..8.0f64) {
            let p = FreeParams::new(v, w, c(0.0, im_a));
            let band = band_edges(&p);
            let k2 = kappa_squared(e, &p);
            prop_assume!(k2.abs() > 1e-9);
            prop_assert_eq!(k2 > 0.0, band.contains(e));
        }

        #[test]
        fn translation_covariance(e in -1.5..4.5f64, x in -2.0..2.0f64, d in -1.0..1.0f64) {
            let p = FreeParams::new(-2.0, 5.0, c(0.4, 0.7));
            let shifted = fundamental_solutions(e, &p, c(d, 0.0)).unwrap();
            let base = fundamental_solutions(e, &p, c(0.0, 0.0)).unwrap();
            let a = shifted.psi.at(x);
            let b = base.psi.at(x + d);
            prop_assert!((a - b).norm() < 1e-12 * (1.0 + b.norm()));
        }

        #[test]
        fn fundamental_solutions_are_not_normalizable(e in -1.9..4.9f64) {
            let p = fig1();
            let pair = fundamental_solutions(e, &p, c(0.0, 0.0)).unwrap();
            let tail = |x: f64| pair.psi.at(x).norm_squared();
            prop_assert!(tail(20.0) >= tail(10.0) * 0.999);
        }
    }
}
