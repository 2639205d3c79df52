//! Closed-form Darboux transformation of the free 2x2 operator.
//!
//! The seed is `U = (ψ_{ε₁}, ψ̄_{ε₂})` with `z_j = κ_j x + δ_j`. Its determinant
//! factorizes as `det U = e^{−2i Re a x} cosh z₁ cosh z₂ D(x) / P` with
//! `P = (w − ε₁)(v − ε₂)` and
//!
//! ```text
//! D(x) = P + (κ₁ tanh z₁ + Im a)(κ₂ tanh z₂ − Im a),
//! ```
//!
//! so the transformation is regular exactly when `D` has no zero.

use std::sync::Arc;

use nalgebra::Vector2;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::dirac::{
    darboux_with, missing_states, BoundState, DarbouxOptions, DarbouxPair, DiracOperator, MissingStateSet, SeedMatrix,
    MIN_DECAY_RATE,
};
use crate::error::{Error, Result};
use crate::field::{MatrixField, SpinorField, FALLBACK_STEP};
use crate::free::{band_edges, gamma2, kappa_squared, FreeParams};
use crate::numerics::{max_abs, Grid, Mat2, I, SINGULAR_THRESHOLD};
use crate::pauli::{sigma1, sigma2, sigma3};

/// Largest pointwise deviation tolerated between a closed form and the generic engine.
pub const ORACLE_TOL: f64 = 1e-8;

/// Seed data `(v, w, a, ε₁, ε₂, δ₁, δ₂)` with `κ₁`, `κ₂`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Seed2x2 {
    pub params: FreeParams,
    pub eps1: f64,
    pub eps2: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub kappa1: f64,
    pub kappa2: f64,
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
}

pub fn build_seed(params: FreeParams, eps1: f64, eps2: f64, delta1: f64, delta2: f64) -> Result<Seed2x2> {
    params.validate()?;
    if ![eps1, eps2, delta1, delta2].iter().all(|p| p.is_finite()) {
        return Err(Error::InvalidParameter("seed energies and phases must be finite".into()));
    }
    let band = band_edges(&params);
    for (name, e) in [("eps1", eps1), ("eps2", eps2)] {
        if !band.contains(e) || kappa_squared(e, &params) <= 0.0 {
            return Err(Error::InvalidSeedEnergy(format!(
                "{name} = {e} is not strictly inside the band ({}, {})",
                band.eps_minus, band.eps_plus
            )));
        }
        for (pname, p) in [("v", params.v), ("w", params.w)] {
            if near(e, p) {
                return Err(Error::InvalidSeedEnergy(format!("{name} = {e} coincides with {pname}, a pole of the seed")));
            }
        }
    }
    Ok(Seed2x2 {
        params,
        eps1,
        eps2,
        delta1,
        delta2,
        kappa1: kappa_squared(eps1, &params).sqrt(),
        kappa2: kappa_squared(eps2, &params).sqrt(),
    })
}

impl Seed2x2 {
    pub fn z1(&self, x: f64) -> f64 {
        self.kappa1 * x + self.delta1
    }

    pub fn z2(&self, x: f64) -> f64 {
        self.kappa2 * x + self.delta2
    }

    fn tanhs(&self, x: f64) -> (f64, f64) {
        (self.z1(x).tanh(), self.z2(x).tanh())
    }

    /// `P = (w − ε₁)(v − ε₂)`.
    pub fn p_const(&self) -> f64 {
        (self.params.w - self.eps1) * (self.params.v - self.eps2)
    }

    /// `ε₁ = ε₂`: the seed spans the whole solution space at one energy.
    pub fn is_degenerate(&self) -> bool {
        near(self.eps1, self.eps2)
    }

    fn d_of(&self, t1: f64, t2: f64) -> f64 {
        let b = self.params.a.im;
        self.p_const() + (self.kappa1 * t1 + b) * (self.kappa2 * t2 - b)
    }

    pub fn d(&self, x: f64) -> f64 {
        let (t1, t2) = self.tanhs(x);
        self.d_of(t1, t2)
    }

    /// `(D₋, D₊)`, the limits of `D` at `x → ∓∞`.
    pub fn d_limits(&self) -> (f64, f64) {
        (self.d_of(-1.0, -1.0), self.d_of(1.0, 1.0))
    }

    pub fn u(&self, x: f64) -> Mat2 {
        let FreeParams { v, w, a } = self.params;
        let (b, r) = (a.im, a.re);
        let (c1, s1) = (self.z1(x).cosh(), self.z1(x).sinh());
        let (c2, s2) = (self.z2(x).cosh(), self.z2(x).sinh());
        let m = Mat2::new(
            C64::new(c1, 0.0),
            I * ((-b * c2 + self.kappa2 * s2) / (v - self.eps2)),
            I * ((b * c1 + self.kappa1 * s1) / (w - self.eps1)),
            C64::new(c2, 0.0),
        );
        m * (-I * r * x).exp()
    }

    pub fn u_x(&self, x: f64) -> Mat2 {
        let FreeParams { v, w, a } = self.params;
        let (b, r) = (a.im, a.re);
        let (k1, k2) = (self.kappa1, self.kappa2);
        let (c1, s1) = (self.z1(x).cosh(), self.z1(x).sinh());
        let (c2, s2) = (self.z2(x).cosh(), self.z2(x).sinh());
        let dm = Mat2::new(
            C64::new(k1 * s1, 0.0),
            I * ((-b * k2 * s2 + k2 * k2 * c2) / (v - self.eps2)),
            I * ((b * k1 * s1 + k1 * k1 * c1) / (w - self.eps1)),
            C64::new(k2 * s2, 0.0),
        );
        dm * (-I * r * x).exp() - self.u(x) * (I * r)
    }

    /// `e^{−2i Re a x} cosh z₁ cosh z₂ D(x) / ((v − ε₂)(w − ε₁))`.
    pub fn det_closed_form(&self, x: f64) -> C64 {
        let r = self.params.a.re;
        (-2.0 * I * r * x).exp() * (self.z1(x).cosh() * self.z2(x).cosh() * self.d(x) / self.p_const())
    }

    pub fn seed_matrix(&self) -> SeedMatrix<2> {
        let (s1, s2) = (*self, *self);
        SeedMatrix::from_matrix_with_derivative(move |x| s1.u(x), move |x| s2.u_x(x), [self.eps1, self.eps2])
            .expect("finite energies")
    }

    /// The free operator the seed solves.
    pub fn operator(&self) -> DiracOperator<2> {
        self.params.operator()
    }

    /// The constants `c₁, c₂, c̃₁, c̃₂` of the closed-form kernel.
    pub fn kernel_constants(&self) -> [C64; 4] {
        let FreeParams { a, .. } = self.params;
        let (b, r, p) = (a.im, a.re, self.p_const());
        let (k1, k2) = (self.kappa1, self.kappa2);
        [
            C64::new(b * b * r - r * p, -b * k2 * k2),
            C64::new(k2 * k2 + p, b * r),
            C64::new(b * b * r - r * p, b * k1 * k1),
            C64::new(k1 * k1 + p, -b * r),
        ]
    }

    /// Numerator `f` of `UₓU⁻¹ = f / D` as a function of `t_j = tanh z_j`.
    fn kernel_numerator(&self, t1: f64, t2: f64) -> Mat2 {
        let FreeParams { v, w, a } = self.params;
        let b = a.im;
        let (k1, k2) = (self.kappa1, self.kappa2);
        let [c1, c2, c1t, c2t] = self.kernel_constants();
        let f11 = I * c1 + k1 * c2 * t1 - I * a.conj() * k2 * (b + k1 * t1) * t2;
        let f22 = I * c1t + k2 * c2t * t2 + I * a * k1 * (b - k2 * t2) * t1;
        let common = b * k1 * t1 - k2 * (b + k1 * t1) * t2;
        let f12 = I * ((w - self.eps1) * (k2 * k2 + common));
        let f21 = I * ((v - self.eps2) * (k1 * k1 + common));
        Mat2::new(f11, f12, f21, f22)
    }

    /// Exact constant kernel `iσ₁(ε − V)` of a degenerate seed.
    fn degenerate_kernel(&self) -> Mat2 {
        sigma1() * I * (Mat2::identity() * C64::new(self.eps1, 0.0) - self.params.matrix())
    }

    /// Closed form of `Uₓ(x)U(x)⁻¹`.
    pub fn kernel_at(&self, x: f64) -> Mat2 {
        if self.is_degenerate() {
            return self.degenerate_kernel();
        }
        let (t1, t2) = self.tanhs(x);
        self.kernel_numerator(t1, t2) / C64::new(self.d_of(t1, t2), 0.0)
    }
}

/// Output of [`regularity`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Regularity {
    /// The closed-form sufficient condition (false where it does not apply).
    pub sufficient_condition_holds: bool,
    /// Whether `(v < w, Im a ≥ 0)` or the mirrored `(w < v, Im a ≤ 0)` orientation applies.
    pub condition_applicable: bool,
    pub condition_lhs: f64,
    pub condition_rhs: f64,
    pub min_abs_d: f64,
    pub node_detected: bool,
    pub node_location: Option<f64>,
}

/// Sufficient condition `(w − ε₁)(ε₂ − v) + (Im a)² > κ₁κ₂ + |Im a|(κ₁ + κ₂)` and a grid scan of `D`.
pub fn regularity(seed: &Seed2x2) -> Regularity {
    regularity_on(seed, &Grid::default())
}

pub fn regularity_on(seed: &Seed2x2, grid: &Grid) -> Regularity {
    let FreeParams { v, w, a } = seed.params;
    let b = a.im;
    let lhs = (w - seed.eps1) * (seed.eps2 - v) + b * b;
    let rhs = seed.kappa1 * seed.kappa2 + b.abs() * (seed.kappa1 + seed.kappa2);
    let applicable = (v < w && b >= 0.0) || (w < v && b <= 0.0);
    let mut min_abs_d = f64::INFINITY;
    let mut node = None;
    let mut prev: Option<(f64, f64)> = None;
    for x in grid.points() {
        let d = seed.d(x);
        min_abs_d = min_abs_d.min(d.abs());
        if node.is_none() {
            if d == 0.0 {
                node = Some(x);
            } else if let Some((xp, dp)) = prev {
                if dp * d < 0.0 {
                    node = Some(xp + (x - xp) * dp / (dp - d));
                }
            }
        }
        prev = Some((x, d));
    }
    Regularity {
        sufficient_condition_holds: applicable && lhs > rhs,
        condition_applicable: applicable,
        condition_lhs: lhs,
        condition_rhs: rhs,
        min_abs_d,
        node_detected: node.is_some(),
        node_location: node,
    }
}

/// Values of `(ṽ, w̃, ã)` at one point or limit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Components2 {
    pub v_t: f64,
    pub w_t: f64,
    pub a_t: C64,
}

impl Components2 {
    pub fn matrix(&self) -> Mat2 {
        Mat2::new(C64::new(self.v_t, 0.0), self.a_t, self.a_t.conj(), C64::new(self.w_t, 0.0))
    }
}

/// Transformed potential `Ṽ = [[ṽ, ã], [ã*, w̃]]` in closed form.
#[derive(Clone, Debug)]
pub struct Transformed2x2 {
    pub seed: Seed2x2,
    pub asymptotic_minus: Components2,
    pub asymptotic_plus: Components2,
    /// Sup-norm distance to the generic engine on the construction grid.
    pub oracle_discrepancy: f64,
    pub regularity: Regularity,
}

fn components(seed: &Seed2x2, t1: f64, t2: f64) -> Components2 {
    let FreeParams { v, w, a } = seed.params;
    let (b, r) = (a.im, a.re);
    let (e1, e2) = (seed.eps1, seed.eps2);
    if seed.is_degenerate() {
        return Components2 { v_t: w, w_t: v, a_t: a.conj() };
    }
    let d = seed.d_of(t1, t2);
    let frac = 2.0 * (e1 - e2) * seed.p_const() / d;
    let bracket = b * (v - w + e1 - e2) + (v - e2) * seed.kappa1 * t1 + (w - e1) * seed.kappa2 * t2;
    let im_conj = b + (e1 - e2) * bracket / d;
    Components2 { v_t: w + e2 - e1 + frac, w_t: v - e2 + e1 - frac, a_t: C64::new(r, -im_conj) }
}

impl Transformed2x2 {
    pub fn components_at(&self, x: f64) -> Components2 {
        let (t1, t2) = self.seed.tanhs(x);
        components(&self.seed, t1, t2)
    }

    pub fn v_t(&self, x: f64) -> f64 {
        self.components_at(x).v_t
    }

    pub fn w_t(&self, x: f64) -> f64 {
        self.components_at(x).w_t
    }

    pub fn a_t(&self, x: f64) -> C64 {
        self.components_at(x).a_t
    }

    pub fn potential_at(&self, x: f64) -> Mat2 {
        self.components_at(x).matrix()
    }

    pub fn potential(&self) -> MatrixField<2> {
        let seed = self.seed;
        MatrixField::new(move |x| {
            let (t1, t2) = seed.tanhs(x);
            components(&seed, t1, t2).matrix()
        })
        .with_asymptotics(self.asymptotic_minus.matrix(), self.asymptotic_plus.matrix())
    }

    pub fn operator(&self) -> DiracOperator<2> {
        DiracOperator::new(gamma2(), self.potential()).expect("−iσ₁ is a valid gamma")
    }

    /// Closed-form kernel `UₓU⁻¹` with its limits.
    pub fn kernel(&self) -> MatrixField<2> {
        let seed = self.seed;
        let field = MatrixField::new(move |x| seed.kernel_at(x));
        match asymptotics(&self.seed) {
            Ok(w) => field.with_asymptotics(w.w_minus, w.w_plus),
            Err(_) => field,
        }
    }

    /// Closed-form intertwining data for the generic residual checks.
    pub fn darboux_pair(&self) -> DarbouxPair<2> {
        DarbouxPair {
            transformed: self.operator(),
            intertwiner_kernel: self.kernel(),
            original: self.seed.operator(),
            seed: self.seed.seed_matrix(),
        }
    }

    /// Band edges of the asymptotic potentials at `−∞` and `+∞`.
    pub fn asymptotic_bands(&self) -> (crate::free::Band, crate::free::Band) {
        let band = |c: &Components2| band_edges(&FreeParams::new(c.v_t, c.w_t, c.a_t));
        (band(&self.asymptotic_minus), band(&self.asymptotic_plus))
    }
}

pub fn transform(seed: &Seed2x2) -> Result<Transformed2x2> {
    transform_with(seed, &DarbouxOptions::default())
}

/// Grid on which the generic engine is compared with the closed form. A
/// degenerate seed has columns that align exponentially fast, so the engine is
/// only trusted on `|x| ≤ 5/κ₁` there.
pub fn oracle_grid(seed: &Seed2x2, grid: &Grid) -> Result<Grid> {
    if seed.is_degenerate() {
        let half = 5.0 / seed.kappa1;
        Grid::new(grid.x_min.max(-half), grid.x_max.min(half), 1001)
    } else {
        Ok(*grid)
    }
}

/// Closed-form transformation, gated on the regularity scan and cross-validated
/// against the generic engine on `opts.grid`.
pub fn transform_with(seed: &Seed2x2, opts: &DarbouxOptions) -> Result<Transformed2x2> {
    let reg = regularity_on(seed, &opts.grid);
    if let Some(x) = reg.node_location {
        return Err(Error::SingularSeed { x });
    }
    let mut t = Transformed2x2 {
        seed: *seed,
        asymptotic_minus: components(seed, -1.0, -1.0),
        asymptotic_plus: components(seed, 1.0, 1.0),
        oracle_discrepancy: 0.0,
        regularity: reg,
    };
    let check = DarbouxOptions { grid: oracle_grid(seed, &opts.grid)?, ..*opts };
    let oracle = darboux_with(&seed.operator(), &seed.seed_matrix(), &check)?;
    let discrepancy = check
        .grid
        .points()
        .map(|x| max_abs(&(t.potential_at(x) - oracle.transformed.potential().at(x))))
        .fold(0.0, |a: f64, b: f64| if b.is_nan() { f64::INFINITY } else { a.max(b) });
    if !(discrepancy < ORACLE_TOL) {
        return Err(Error::OracleMismatch(discrepancy));
    }
    t.oracle_discrepancy = discrepancy;
    Ok(t)
}

/// Closed-form normalizable partner state at `ε₁` (`which = 1`) or `ε₂` (`which = 2`),
/// unnormalized, with analytic derivative.
pub fn missing_state(seed: &Seed2x2, which: u8) -> SpinorField<2> {
    let s = *seed;
    let eval = move |x: f64, derivative: bool| -> Vector2<C64> {
        let FreeParams { v, w, a } = s.params;
        let (b, r) = (a.im, a.re);
        let (k1, k2) = (s.kappa1, s.kappa2);
        let (t1, t2) = s.tanhs(x);
        let d = s.d_of(t1, t2);
        let dd = k1 * k1 * (1.0 - t1 * t1) * (k2 * t2 - b) + (k1 * t1 + b) * k2 * k2 * (1.0 - t2 * t2);
        let ph = (-I * r * x).exp();
        let (g, dg, spin, dspin) = if which == 1 {
            let g = 1.0 / (s.z1(x).cosh() * d);
            let dg = -k1 * t1 * g - g * dd / d;
            let c2 = I * ((-b + k2 * t2) / (v - s.eps2));
            let dc2 = I * (k2 * k2 * (1.0 - t2 * t2) / (v - s.eps2));
            (g, dg, Vector2::new(C64::new(1.0, 0.0), c2), Vector2::new(C64::new(0.0, 0.0), dc2))
        } else {
            let g = 1.0 / (s.z2(x).cosh() * d);
            let dg = -k2 * t2 * g - g * dd / d;
            let c1 = I * ((b + k1 * t1) / (w - s.eps1));
            let dc1 = I * (k1 * k1 * (1.0 - t1 * t1) / (w - s.eps1));
            (g, dg, Vector2::new(c1, C64::new(1.0, 0.0)), Vector2::new(dc1, C64::new(0.0, 0.0)))
        };
        if derivative {
            (spin * (C64::new(dg, 0.0) - I * r * g) + dspin * C64::new(g, 0.0)) * ph
        } else {
            spin * (ph * g)
        }
    };
    SpinorField::with_derivative(move |x| eval(x, false), move |x| eval(x, true))
}

pub fn bound_states(t: &Transformed2x2) -> Result<Vec<BoundState<2>>> {
    bound_states_on(t, &Grid::default())
}

/// Normalized partner states; empty for a degenerate seed.
pub fn bound_states_on(t: &Transformed2x2, grid: &Grid) -> Result<Vec<BoundState<2>>> {
    let seed = &t.seed;
    if seed.is_degenerate() {
        return Ok(Vec::new());
    }
    let h = t.operator();
    let threshold = 0.5 * seed.kappa1.min(seed.kappa2);
    Ok([(1u8, seed.eps1), (2u8, seed.eps2)]
        .into_iter()
        .map(|(which, e)| BoundState::classify(&h, e, missing_state(seed, which), grid, threshold))
        .filter(|s| s.finite_norm)
        .collect())
}

/// Chiral transformation of `h = −iσ₁∂ₓ + ω₃(x)σ₃` with seed `(ξ₁, σ₂ξ₁)`.
#[derive(Clone)]
pub struct ChiralTransform {
    omega: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    xi: SpinorField<2>,
    pub eps1: f64,
}

impl std::fmt::Debug for ChiralTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChiralTransform").field("eps1", &self.eps1).finish_non_exhaustive()
    }
}

fn diagonal_operator(omega: Arc<dyn Fn(f64) -> f64 + Send + Sync>) -> DiracOperator<2> {
    DiracOperator::new(gamma2(), MatrixField::new(move |x| sigma3() * C64::new(omega(x), 0.0))).expect("valid gamma")
}

pub fn chiral_transform(
    omega3: impl Fn(f64) -> f64 + Send + Sync + 'static,
    xi1: SpinorField<2>,
    eps1: f64,
) -> Result<ChiralTransform> {
    chiral_transform_on(omega3, xi1, eps1, &DarbouxOptions::default())
}

pub fn chiral_transform_on(
    omega3: impl Fn(f64) -> f64 + Send + Sync + 'static,
    xi1: SpinorField<2>,
    eps1: f64,
    opts: &DarbouxOptions,
) -> Result<ChiralTransform> {
    let omega: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(omega3);
    if let Some(x) = opts.grid.points().find(|&x| !omega(x).is_finite()) {
        return Err(Error::InvalidInput(format!("omega3 is not finite at x = {x}")));
    }
    let ct = ChiralTransform { omega, xi: xi1, eps1 };
    let h = ct.original_operator();
    let residual = ct.seed_matrix()?.residual(&h, &opts.grid, opts.step);
    if !(residual < opts.tol_seed) {
        return Err(Error::InvalidSeed(format!("xi1 is not an eigensolution (relative residual {residual:.3e})")));
    }
    let mut prev: Option<C64> = None;
    for x in opts.grid.points() {
        let xi = ct.xi.at(x);
        let q = (xi.transpose() * xi)[(0, 0)] / xi.norm_squared();
        if !(q.norm() >= SINGULAR_THRESHOLD) || prev.is_some_and(|p| (q * p.conj()).re < 0.0) {
            return Err(Error::SingularSeed { x });
        }
        prev = Some(q);
    }
    Ok(ct)
}

impl ChiralTransform {
    pub fn omega(&self, x: f64) -> f64 {
        (self.omega)(x)
    }

    /// `ω̃₃ = ω₃ + 2 ξ₁ᵀσ₂ξ₁′ / ξ₁ᵀξ₁`.
    pub fn omega_t(&self, x: f64) -> f64 {
        let xi = self.xi.at(x);
        let dxi = self.xi.derivative_at(x, FALLBACK_STEP).unwrap_or_else(|_| Vector2::from_element(C64::new(f64::NAN, 0.0)));
        let num = (xi.transpose() * sigma2() * dxi)[(0, 0)];
        let den = (xi.transpose() * xi)[(0, 0)];
        self.omega(x) + 2.0 * (num / den).re
    }

    pub fn original_operator(&self) -> DiracOperator<2> {
        diagonal_operator(self.omega.clone())
    }

    pub fn operator(&self) -> DiracOperator<2> {
        let me = self.clone();
        diagonal_operator(Arc::new(move |x| me.omega_t(x)))
    }

    /// `U₁ = (ξ₁, σ₂ξ₁)` with energies `(ε₁, −ε₁)`.
    pub fn seed_matrix(&self) -> Result<SeedMatrix<2>> {
        SeedMatrix::from_columns(vec![self.xi.clone(), self.xi.transformed(sigma2())], [self.eps1, -self.eps1])
    }

    /// Partner states at `±ε₁`.
    pub fn bound_states(&self, grid: &Grid) -> Result<MissingStateSet<2>> {
        missing_states(&self.seed_matrix()?, &self.operator(), grid, MIN_DECAY_RATE)
    }
}

/// Limits `w± = lim_{x→±∞} UₓU⁻¹` with the constants entering them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsymptoticIntertwiner {
    pub w_minus: Mat2,
    pub w_plus: Mat2,
    pub c1: C64,
    pub c2: C64,
    pub c1_t: C64,
    pub c2_t: C64,
    pub d_plus: f64,
    pub d_minus: f64,
}

pub fn asymptotics(seed: &Seed2x2) -> Result<AsymptoticIntertwiner> {
    let [c1, c2, c1_t, c2_t] = seed.kernel_constants();
    let (d_minus, d_plus) = seed.d_limits();
    let (w_minus, w_plus) = if seed.is_degenerate() {
        (seed.degenerate_kernel(), seed.degenerate_kernel())
    } else {
        let scale = seed.p_const().abs().max(1.0);
        for d in [d_minus, d_plus] {
            if d.abs() < 1e-12 * scale {
                return Err(Error::DegenerateAsymptotics(d));
            }
        }
        (
            seed.kernel_numerator(-1.0, -1.0) / C64::new(d_minus, 0.0),
            seed.kernel_numerator(1.0, 1.0) / C64::new(d_plus, 0.0),
        )
    };
    Ok(AsymptoticIntertwiner { w_minus, w_plus, c1, c2, c1_t, c2_t, d_plus, d_minus })
}
