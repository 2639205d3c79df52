//! Reduction of 4x4 Dirac operators to pairs of 2x2 blocks and back.
//!
//! A reducible operator satisfies `𝒰⁻¹ H 𝒰 = 𝕊₁⊗h₁ + 𝕊₂⊗h₂` with `h_j = −iσ₁∂ₓ + v_j`.
//! Two unitaries are provided: `𝒰_dis(α)` for the intervalley distortion model
//! (`γ = −iσ₃⊗σ₁`) and `𝒰_soc` for spin-orbit coupling (`γ = −iσ₀⊗σ₁`).

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::sync::Arc;

use nalgebra::{SMatrix, Vector2};
use num_complex::Complex64 as C64;

use crate::darboux2::{bound_states_on, transform_with, Components2, Seed2x2, Transformed2x2};
use crate::dirac::{
    composition_residual, darboux_with, default_test_spinors, intertwine_apply, BoundState, DarbouxOptions, DarbouxPair,
    DiracOperator, FirstOrderOperator, SeedMatrix,
};
use crate::error::{Error, Result};
use crate::field::{MatrixField, SpinorField};
use crate::free::{fundamental_psi, gamma2, FreeParams};
use crate::numerics::{c, max_abs, Grid, Mat2, Mat4, I};
use crate::pauli::{block, block_diag, kron, sigma0, sigma1, sigma3};

/// Largest off-block leakage or constraint violation accepted by [`reduce`].
pub const REDUCIBILITY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeKind {
    Distortion,
    SpinOrbit,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReductionScheme {
    pub kind: SchemeKind,
    pub alpha: f64,
    pub unitary: Mat4,
}

impl ReductionScheme {
    pub fn distortion(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha = {alpha} must be finite")));
        }
        let e = C64::from_polar(1.0, alpha);
        let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
        #[rustfmt::skip]
        let u = Mat4::new(
            z,  o,          z,          -e.conj(),
            o,  z,          -e.conj(),  z,
            z,  -e,         z,          -o,
            e,  z,          o,          z,
        );
        Ok(ReductionScheme { kind: SchemeKind::Distortion, alpha, unitary: u * c(FRAC_1_SQRT_2, 0.0) })
    }

    /// `α` is fixed to `π/2`.
    pub fn spin_orbit() -> Self {
        let e = C64::from_polar(1.0, FRAC_PI_2);
        let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
        #[rustfmt::skip]
        let u = Mat4::new(
            o,  z,  -e.conj(),  z,
            z,  o,  z,          -e.conj(),
            z,  e,  z,          o,
            e,  z,  o,          z,
        );
        ReductionScheme { kind: SchemeKind::SpinOrbit, alpha: FRAC_PI_2, unitary: u * c(FRAC_1_SQRT_2, 0.0) }
    }

    pub fn gamma(&self) -> Mat4 {
        let outer = match self.kind {
            SchemeKind::Distortion => sigma3(),
            SchemeKind::SpinOrbit => sigma0(),
        };
        kron(&outer, &sigma1()) * (-I)
    }

    /// `𝒰 (𝕊₁⊗m₁ + 𝕊₂⊗m₂) 𝒰⁻¹`.
    pub fn embed(&self, m1: &Mat2, m2: &Mat2) -> Mat4 {
        self.unitary * block_diag(m1, m2) * self.unitary.adjoint()
    }

    /// Diagonal blocks of `𝒰⁻¹ M 𝒰` and the sup-norm of its off-diagonal blocks.
    pub fn split(&self, m: &Mat4) -> (Mat2, Mat2, f64) {
        let r = self.unitary.adjoint() * m * self.unitary;
        let leak = max_abs(&block(&r, 0, 1)).max(max_abs(&block(&r, 1, 0)));
        (block(&r, 0, 0), block(&r, 1, 1), leak)
    }

    /// `𝒰 (e_{block} ⊗ ·)` as a 4x2 isometry, `block ∈ {0, 1}`.
    pub fn embedding(&self, block: usize) -> SMatrix<C64, 4, 2> {
        self.unitary.fixed_columns::<2>(2 * block).into_owned()
    }

    pub fn embed_spinor(&self, block: usize, xi: &SpinorField<2>) -> SpinorField<4> {
        xi.transformed(self.embedding(block))
    }

    fn embed_field(&self, f1: &MatrixField<2>, f2: &MatrixField<2>) -> MatrixField<4> {
        let (s, a, b) = (*self, f1.clone(), f2.clone());
        let field = MatrixField::new(move |x| s.embed(&a.at(x), &b.at(x)));
        match (f1.asymptotics(), f2.asymptotics()) {
            (Some((m1, p1)), Some((m2, p2))) => field.with_asymptotics(self.embed(&m1, &m2), self.embed(&p1, &p2)),
            _ => field,
        }
    }
}

/// Pointwise components of a distortion potential.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistortionPotential {
    pub v_a: f64,
    pub v_b: f64,
    pub v: C64,
    pub v_prime: C64,
    pub w_a: C64,
    pub w_b: C64,
    pub w_plus: C64,
    pub w_minus: C64,
}

impl DistortionPotential {
    /// Components of `𝒰_dis(α)(𝕊₁⊗v₁ + 𝕊₂⊗v₂)𝒰_dis⁻¹` from the block entries.
    pub fn from_blocks(b1: &Components2, b2: &Components2, alpha: f64) -> Self {
        let e = C64::from_polar(1.0, -alpha);
        let v = (b1.a_t.conj() + b2.a_t.conj()) * 0.5;
        DistortionPotential {
            v_a: 0.5 * (b1.w_t + b2.w_t),
            v_b: 0.5 * (b1.v_t + b2.v_t),
            v,
            v_prime: -v,
            w_a: e * (0.5 * (b2.w_t - b1.w_t)),
            w_b: e * (0.5 * (b1.v_t - b2.v_t)),
            w_plus: e * (b1.a_t.conj() - b2.a_t.conj()) * 0.5,
            w_minus: e * (b2.a_t - b1.a_t) * 0.5,
        }
    }

    /// Reads the upper triangle; the lower triangle is ignored.
    pub fn from_matrix(m: &Mat4) -> Self {
        DistortionPotential {
            v_a: m[(0, 0)].re,
            v_b: m[(1, 1)].re,
            v: m[(0, 1)],
            v_prime: m[(2, 3)],
            w_a: m[(0, 2)],
            w_b: m[(1, 3)],
            w_plus: m[(0, 3)],
            w_minus: m[(1, 2)],
        }
    }

    pub fn matrix(&self) -> Mat4 {
        let r = |x: f64| c(x, 0.0);
        #[rustfmt::skip]
        let m = Mat4::new(
            r(self.v_a),          self.v,                  self.w_a,                 self.w_plus,
            self.v.conj(),        r(self.v_b),             self.w_minus,             self.w_b,
            self.w_a.conj(),      self.w_minus.conj(),     r(self.v_a),              self.v_prime,
            self.w_plus.conj(),   self.w_b.conj(),         self.v_prime.conj(),      r(self.v_b),
        );
        m
    }

    /// Largest violation of `V′ = −V`, `W⁺ = −e^{−2iα}(W⁻)*`, `e^{iα}W_A, e^{iα}W_B ∈ ℝ`.
    pub fn reducibility_defect(&self, alpha: f64) -> f64 {
        let e = C64::from_polar(1.0, alpha);
        [
            (self.v_prime + self.v).norm(),
            (self.w_plus + self.w_minus.conj() / (e * e)).norm(),
            (e * self.w_a).im.abs(),
            (e * self.w_b).im.abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Pointwise components `(V, Δ, λ)` of a spin-orbit potential
/// `[[V−Δ, 0, 0, 0], [0, V+Δ, −2iλ, 0], [0, 2iλ, V+Δ, 0], [0, 0, 0, V−Δ]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinOrbitPotential {
    pub v: f64,
    pub delta: f64,
    pub lambda: f64,
}

impl SpinOrbitPotential {
    pub fn matrix(&self) -> Mat4 {
        let mut m = Mat4::zeros();
        m[(0, 0)] = c(self.v - self.delta, 0.0);
        m[(3, 3)] = c(self.v - self.delta, 0.0);
        m[(1, 1)] = c(self.v + self.delta, 0.0);
        m[(2, 2)] = c(self.v + self.delta, 0.0);
        m[(1, 2)] = c(0.0, -2.0 * self.lambda);
        m[(2, 1)] = c(0.0, 2.0 * self.lambda);
        m
    }

    pub fn from_matrix(m: &Mat4) -> Self {
        let (a, b) = (m[(0, 0)].re, m[(1, 1)].re);
        SpinOrbitPotential { v: 0.5 * (a + b), delta: 0.5 * (b - a), lambda: (I * m[(1, 2)]).re * 0.5 }
    }

    /// Sup-norm distance of `m` from the spin-orbit pattern.
    pub fn pattern_defect(m: &Mat4) -> f64 {
        (m - Self::from_matrix(m).matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Two 2x2 blocks obtained by [`reduce`].
#[derive(Clone, Debug)]
pub struct ReducedPair {
    pub h1: DiracOperator<2>,
    pub h2: DiracOperator<2>,
    pub leakage: f64,
}

pub fn assemble(scheme: &ReductionScheme, h1: &DiracOperator<2>, h2: &DiracOperator<2>) -> Result<DiracOperator<4>> {
    for (name, h) in [("h1", h1), ("h2", h2)] {
        if max_abs(&(h.gamma() - gamma2())) > 1e-14 {
            return Err(Error::InvalidInput(format!("{name} must have gamma = −iσ₁")));
        }
    }
    DiracOperator::new(scheme.gamma(), scheme.embed_field(h1.potential(), h2.potential()))
}

pub fn reduce(scheme: &ReductionScheme, h: &DiracOperator<4>, grid: &Grid) -> Result<ReducedPair> {
    if max_abs(&(h.gamma() - scheme.gamma())) > 1e-14 {
        return Err(Error::InvalidInput("operator gamma does not match the reduction scheme".into()));
    }
    let mut leakage: f64 = 0.0;
    for x in grid.points() {
        let m = h.potential().at(x);
        let (_, _, leak) = scheme.split(&m);
        let defect = match scheme.kind {
            SchemeKind::Distortion => {
                let d = DistortionPotential::from_matrix(&m);
                d.reducibility_defect(scheme.alpha).max(max_abs(&(d.matrix() - m)))
            }
            SchemeKind::SpinOrbit => 0.0,
        };
        leakage = leakage.max(leak).max(defect);
        if leakage.is_nan() {
            leakage = f64::INFINITY;
        }
    }
    if !(leakage < REDUCIBILITY_TOL) {
        return Err(Error::NotReducible { leakage });
    }
    let block_field = |k: usize| {
        let (s, v) = (*scheme, h.potential().clone());
        let field = MatrixField::new(move |x| {
            let (a, b, _) = s.split(&v.at(x));
            if k == 0 { a } else { b }
        });
        match h.potential().asymptotics() {
            Some((m, p)) => {
                let pick = |q: &Mat4| {
                    let (a, b, _) = scheme.split(q);
                    if k == 0 { a } else { b }
                };
                field.with_asymptotics(pick(&m), pick(&p))
            }
            None => field,
        }
    };
    Ok(ReducedPair {
        h1: DiracOperator::new(gamma2(), block_field(0))?,
        h2: DiracOperator::new(gamma2(), block_field(1))?,
        leakage,
    })
}

/// A block of a reducible intertwiner.
#[derive(Clone, Debug)]
pub enum BlockIntertwiner {
    /// `∂ₓ − K(x)`.
    Darboux(MatrixField<2>),
    /// The zeroth-order identity `σ₀`.
    Identity,
}

impl BlockIntertwiner {
    fn parts(&self) -> (Mat2, MatrixField<2>) {
        match self {
            BlockIntertwiner::Darboux(k) => (Mat2::identity(), k.map(|m| -m)),
            BlockIntertwiner::Identity => (Mat2::zeros(), MatrixField::constant(Mat2::identity())),
        }
    }
}

/// `𝒰 (𝕊₁⊗L₁ + 𝕊₂⊗L₂) 𝒰⁻¹`.
pub fn reducible_intertwiner(scheme: &ReductionScheme, l1: &BlockIntertwiner, l2: &BlockIntertwiner) -> FirstOrderOperator<4> {
    let (lead1, z1) = l1.parts();
    let (lead2, z2) = l2.parts();
    FirstOrderOperator::new(scheme.embed(&lead1, &lead2), scheme.embed_field(&z1, &z2))
}

/// Sup of `|(L H − H̃ L)ψ|` for a general first-order `L`; default packets when `tests` is empty.
pub fn first_order_intertwining_residual<const N: usize>(
    l: &FirstOrderOperator<N>,
    h: &DiracOperator<N>,
    h_tilde: &DiracOperator<N>,
    tests: &[SpinorField<N>],
    grid: &Grid,
    step: f64,
) -> f64 {
    let defaults;
    let tests = if tests.is_empty() {
        defaults = default_test_spinors();
        &defaults[..]
    } else {
        tests
    };
    composition_residual((l, &h.first_order()), (&h_tilde.first_order(), l), tests, grid, step)
}

/// Pointwise deviations of the linear relations between distortion components.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelationSuite {
    /// `sup |Ṽ_B + Ṽ_A − (w₁+w₂+v₁+v₂)/2|`.
    pub diagonal_sum: f64,
    /// `sup |W̃_B − W̃_A − e^{−iα}(v₁+w₁−v₂−w₂)/2|`.
    pub w_diagonal_difference: f64,
    /// `sup |W̃⁻ − W̃⁺ + e^{−iα}Re(a₁−a₂)|`.
    pub w_cross_difference: f64,
    /// Same as `w_diagonal_difference` with the opposite sign of the shift.
    pub w_diagonal_difference_flipped: f64,
    /// Same as `w_cross_difference` with the opposite sign of the shift.
    pub w_cross_difference_flipped: f64,
}

/// Transformed distortion model assembled from two closed-form 2x2 transformations.
#[derive(Clone, Debug)]
pub struct DistortionModel {
    pub scheme: ReductionScheme,
    pub block1: Transformed2x2,
    pub block2: Transformed2x2,
    pub original: DiracOperator<4>,
    pub operator: DiracOperator<4>,
    pub bound_states: Vec<BoundState<4>>,
    /// Sup distance between the component formulas and direct conjugation.
    pub conjugation_discrepancy: f64,
    /// Sup distance to the generic 4x4 engine.
    pub oracle_discrepancy: f64,
}

pub fn build_distortion_model(seed1: &Seed2x2, seed2: &Seed2x2, alpha: f64) -> Result<DistortionModel> {
    build_distortion_model_with(seed1, seed2, alpha, &DarbouxOptions::default())
}

pub fn build_distortion_model_with(seed1: &Seed2x2, seed2: &Seed2x2, alpha: f64, opts: &DarbouxOptions) -> Result<DistortionModel> {
    let scheme = ReductionScheme::distortion(alpha)?;
    let (b1, b2) = rayon::join(|| transform_with(seed1, opts), || transform_with(seed2, opts));
    let (block1, block2) = (b1?, b2?);
    let original = assemble(&scheme, &seed1.operator(), &seed2.operator())?;
    let operator = assemble(&scheme, &block1.operator(), &block2.operator())?;

    let mut conjugation_discrepancy: f64 = 0.0;
    for x in opts.grid.points() {
        let formula = DistortionPotential::from_blocks(&block1.components_at(x), &block2.components_at(x), alpha).matrix();
        conjugation_discrepancy = conjugation_discrepancy.max(max_abs(&(formula - operator.potential().at(x))));
    }
    if !(conjugation_discrepancy < REDUCIBILITY_TOL) {
        return Err(Error::OracleMismatch(conjugation_discrepancy));
    }

    let seed = distortion_seed(&scheme, seed1, seed2);
    let oracle = darboux_with(&original, &seed, opts)?;
    let oracle_discrepancy = opts
        .grid
        .points()
        .map(|x| max_abs(&(oracle.transformed.potential().at(x) - operator.potential().at(x))))
        .fold(0.0, |a: f64, b: f64| if b.is_nan() { f64::INFINITY } else { a.max(b) });
    if !(oracle_discrepancy < crate::darboux2::ORACLE_TOL) {
        return Err(Error::OracleMismatch(oracle_discrepancy));
    }

    let mut bound_states = Vec::new();
    for (k, block) in [(0, &block1), (1, &block2)] {
        for s in bound_states_on(block, &opts.grid)? {
            bound_states.push(embed_state(&scheme, k, s, &operator, opts));
        }
    }
    Ok(DistortionModel { scheme, block1, block2, original, operator, bound_states, conjugation_discrepancy, oracle_discrepancy })
}

/// Embeds a normalized block state; density and norm carry over unchanged.
fn embed_state(scheme: &ReductionScheme, k: usize, s: BoundState<2>, h: &DiracOperator<4>, opts: &DarbouxOptions) -> BoundState<4> {
    let spinor = scheme.embed_spinor(k, &s.spinor);
    let residual = h.residual_sup(s.energy, &spinor, &opts.grid, opts.step);
    BoundState { energy: s.energy, spinor, norm: s.norm, residual, finite_norm: s.finite_norm, decay_rate: s.decay_rate }
}

/// `𝒰 · blockdiag(U₁, U₂)` with energies `(ε₁, ε₂, ε₃, ε₄)`.
fn distortion_seed(scheme: &ReductionScheme, seed1: &Seed2x2, seed2: &Seed2x2) -> SeedMatrix<4> {
    let (u, s1, s2) = (scheme.unitary, *seed1, *seed2);
    SeedMatrix::from_matrix_with_derivative(
        move |x| u * block_diag(&s1.u(x), &s2.u(x)),
        move |x| u * block_diag(&s1.u_x(x), &s2.u_x(x)),
        [seed1.eps1, seed1.eps2, seed2.eps1, seed2.eps2],
    )
    .expect("finite energies")
}

impl DistortionModel {
    pub fn components_at(&self, x: f64) -> DistortionPotential {
        DistortionPotential::from_blocks(&self.block1.components_at(x), &self.block2.components_at(x), self.scheme.alpha)
    }

    /// `𝒰 · blockdiag(K₁, K₂) · 𝒰⁻¹` packaged for the generic residual checks.
    pub fn darboux_pair(&self) -> DarbouxPair<4> {
        let (p1, p2) = (self.block1.darboux_pair(), self.block2.darboux_pair());
        DarbouxPair {
            transformed: self.operator.clone(),
            intertwiner_kernel: self.scheme.embed_field(&p1.intertwiner_kernel, &p2.intertwiner_kernel),
            original: self.original.clone(),
            seed: distortion_seed(&self.scheme, &self.block1.seed, &self.block2.seed),
        }
    }

    pub fn intertwiner(&self) -> FirstOrderOperator<4> {
        reducible_intertwiner(
            &self.scheme,
            &BlockIntertwiner::Darboux(self.block1.kernel()),
            &BlockIntertwiner::Darboux(self.block2.kernel()),
        )
    }

    pub fn relation_suite(&self, grid: &Grid) -> RelationSuite {
        let (p1, p2) = (self.block1.seed.params, self.block2.seed.params);
        let e = C64::from_polar(1.0, -self.scheme.alpha);
        let sum = 0.5 * (p1.w + p2.w + p1.v + p2.v);
        let shift_d = e * (0.5 * (p1.v + p1.w - p2.v - p2.w));
        let shift_c = e * (p1.a - p2.a).re;
        let mut r = RelationSuite {
            diagonal_sum: 0.0,
            w_diagonal_difference: 0.0,
            w_cross_difference: 0.0,
            w_diagonal_difference_flipped: 0.0,
            w_cross_difference_flipped: 0.0,
        };
        for x in grid.points() {
            let d = DistortionPotential::from_matrix(&self.operator.potential().at(x));
            let dd = d.w_b - d.w_a;
            let dc = d.w_minus - d.w_plus;
            r.diagonal_sum = r.diagonal_sum.max((d.v_b + d.v_a - sum).abs());
            r.w_diagonal_difference = r.w_diagonal_difference.max((dd - shift_d).norm());
            r.w_cross_difference = r.w_cross_difference.max((dc + shift_c).norm());
            r.w_diagonal_difference_flipped = r.w_diagonal_difference_flipped.max((dd + shift_d).norm());
            r.w_cross_difference_flipped = r.w_cross_difference_flipped.max((dc - shift_c).norm());
        }
        r
    }
}

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Rashba profile of the spin-orbit model.
#[derive(Clone)]
pub enum Lambda {
    Constant(f64),
    /// `λ ≡ ṽ₁`, the Klein-tunneling case.
    EqualToV1Tilde,
    Field(RealFn),
}

impl std::fmt::Debug for Lambda {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Lambda::Constant(l) => write!(f, "Constant({l})"),
            Lambda::EqualToV1Tilde => write!(f, "EqualToV1Tilde"),
            Lambda::Field(_) => write!(f, "Field(..)"),
        }
    }
}

/// Partially transformed spin-orbit model `𝒰_soc(𝕊₁⊗h̃₁ + 𝕊₂⊗h₂)𝒰_soc⁻¹`.
#[derive(Clone, Debug)]
pub struct SpinOrbitModel {
    pub scheme: ReductionScheme,
    pub v1: f64,
    pub eps1: f64,
    pub lambda: Lambda,
    pub block1: Transformed2x2,
    pub h2: DiracOperator<2>,
    pub original: DiracOperator<4>,
    pub operator: DiracOperator<4>,
    /// `Φ̃_{±ε₁} = 𝒰_soc((1,0)ᵀ⊗ξ̃_{±ε₁})`.
    pub bound_states: Vec<BoundState<4>>,
    pub klein: bool,
}

pub fn build_spinorbit_model(v1: f64, eps1: f64, lambda: Lambda) -> Result<SpinOrbitModel> {
    build_spinorbit_model_with(v1, eps1, lambda, &DarbouxOptions::default())
}

pub fn build_spinorbit_model_with(v1: f64, eps1: f64, lambda: Lambda, opts: &DarbouxOptions) -> Result<SpinOrbitModel> {
    if !(v1.is_finite() && eps1.is_finite() && 0.0 < eps1 && eps1 < v1) {
        return Err(Error::InvalidParameter(format!("eps1 = {eps1} must lie in (0, v1) with v1 = {v1}")));
    }
    if let Lambda::Constant(l) = lambda {
        if !l.is_finite() {
            return Err(Error::InvalidParameter(format!("lambda_value = {l} must be finite")));
        }
    }
    let scheme = ReductionScheme::spin_orbit();
    let seed = crate::darboux2::build_seed(FreeParams::new(v1, -v1, c(0.0, 0.0)), eps1, -eps1, 0.0, 0.0)?;
    let block1 = transform_with(&seed, opts)?;

    let b = block1.clone();
    let v1t: RealFn = Arc::new(move |x| b.v_t(x));
    let lam: RealFn = match &lambda {
        Lambda::Constant(l) => {
            let l = *l;
            Arc::new(move |_| l)
        }
        Lambda::EqualToV1Tilde => v1t.clone(),
        Lambda::Field(f) => f.clone(),
    };
    let h2_matrix = {
        let (v1t, lam) = (v1t.clone(), lam.clone());
        move |x: f64| {
            let t = v1t(x);
            Mat2::new(c(t, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(2.0 * lam(x) - t, 0.0))
        }
    };
    let mut h2_field = MatrixField::new(h2_matrix.clone());
    let lam_limits = match &lambda {
        Lambda::Constant(l) => Some((*l, *l)),
        Lambda::EqualToV1Tilde => Some((block1.asymptotic_minus.v_t, block1.asymptotic_plus.v_t)),
        Lambda::Field(_) => None,
    };
    if let Some((lm, lp)) = lam_limits {
        let lim = |t: f64, l: f64| Mat2::new(c(t, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(2.0 * l - t, 0.0));
        h2_field = h2_field.with_asymptotics(lim(block1.asymptotic_minus.v_t, lm), lim(block1.asymptotic_plus.v_t, lp));
    }
    let h2 = DiracOperator::new(gamma2(), h2_field)?;
    let original = assemble(&scheme, &seed.operator(), &h2)?;
    let operator = assemble(&scheme, &block1.operator(), &h2)?;

    let bound_states = bound_states_on(&block1, &opts.grid)?
        .into_iter()
        .map(|s| embed_state(&scheme, 0, s, &operator, opts))
        .collect();
    let klein = matches!(lambda, Lambda::EqualToV1Tilde);
    Ok(SpinOrbitModel { scheme, v1, eps1, lambda, block1, h2, original, operator, bound_states, klein })
}

impl SpinOrbitModel {
    pub fn v1_tilde(&self, x: f64) -> f64 {
        self.block1.v_t(x)
    }

    pub fn components_at(&self, x: f64) -> SpinOrbitPotential {
        SpinOrbitPotential::from_matrix(&self.operator.potential().at(x))
    }

    /// `𝒰_soc(𝕊₁⊗L₁ + 𝕊₂⊗σ₀)𝒰_soc⁻¹`.
    pub fn intertwiner(&self) -> FirstOrderOperator<4> {
        reducible_intertwiner(&self.scheme, &BlockIntertwiner::Darboux(self.block1.kernel()), &BlockIntertwiner::Identity)
    }

    /// `𝒰_soc((1,0)ᵀ⊗ξ̃_E)` with `ξ̃_E = L₁ψ_E` for any real `E ≠ ±v₁`.
    pub fn block_eigensolution(&self, energy: f64) -> Result<SpinorField<4>> {
        let psi = fundamental_psi(energy, &self.block1.seed.params, c(0.0, 0.0))?;
        Ok(self.scheme.embed_spinor(0, &intertwine_apply(&self.block1.darboux_pair(), &psi)))
    }

    /// `Φ(x) = ∫₀ˣ ṽ₁ = v₁x − 2 atanh(√((v₁−ε₁)/(v₁+ε₁)) tanh κx)`.
    pub fn v1_tilde_integral(&self, x: f64) -> f64 {
        let (v, e, k) = (self.v1, self.eps1, self.block1.seed.kappa1);
        v * x - 2.0 * (((v - e) / (v + e)).sqrt() * (k * x).tanh()).atanh()
    }

    /// `e^{−iσ₁Φ(x)}(c₁e^{iEx}(1,1)ᵀ + c₂e^{−iEx}(1,−1)ᵀ)`, the solutions of `h₂` when `λ ≡ ṽ₁`.
    pub fn klein_solution(&self, energy: f64, c1: C64, c2: C64) -> Result<SpinorField<2>> {
        if !self.klein {
            return Err(Error::InvalidInput("Klein solutions exist only for lambda_mode = equal_to_v1_tilde".into()));
        }
        let m = self.clone();
        let rotation = move |x: f64| {
            let p = m.v1_tilde_integral(x);
            sigma0() * c(p.cos(), 0.0) - sigma1() * c(0.0, p.sin())
        };
        let free = move |x: f64| {
            Vector2::new(c1, c1) * C64::new(0.0, energy * x).exp() + Vector2::new(c2, -c2) * C64::new(0.0, -energy * x).exp()
        };
        let free_d = move |x: f64| {
            Vector2::new(c1, c1) * (I * energy * C64::new(0.0, energy * x).exp())
                - Vector2::new(c2, -c2) * (I * energy * C64::new(0.0, -energy * x).exp())
        };
        let m2 = self.clone();
        let (r1, r2) = (rotation.clone(), rotation);
        Ok(SpinorField::with_derivative(
            move |x| r1(x) * free(x),
            move |x| r2(x) * (free_d(x) - sigma1() * I * c(m2.v1_tilde(x), 0.0) * free(x)),
        ))
    }

    /// `sup |h₂ψ − e^{−iσ₁Φ}(−iσ₁∂ₓ)(e^{iσ₁Φ}ψ)|` over `tests` (defaults when empty).
    pub fn klein_equivalence_residual(&self, tests: &[SpinorField<2>], grid: &Grid, step: f64) -> Result<f64> {
        if !self.klein {
            return Err(Error::InvalidInput("the unitary equivalence holds only for lambda_mode = equal_to_v1_tilde".into()));
        }
        let defaults;
        let tests = if tests.is_empty() {
            defaults = default_test_spinors::<2>();
            &defaults[..]
        } else {
            tests
        };
        let rot = |x: f64, sign: f64| {
            let p = sign * self.v1_tilde_integral(x);
            sigma0() * c(p.cos(), 0.0) - sigma1() * c(0.0, p.sin())
        };
        let free = FirstOrderOperator::new(gamma2(), MatrixField::zero());
        let mut worst: f64 = 0.0;
        for psi in tests {
            for x in grid.interior(crate::dirac::INTERIOR_MARGIN) {
                let lhs = self.h2.apply(psi, x, step)?;
                let rotated = |y: f64| rot(y, -1.0) * psi.at(y);
                let rhs = rot(x, 1.0) * free.apply_fn(&rotated, x, step)?;
                worst = worst.max(crate::numerics::max_abs(&(lhs - rhs)));
            }
        }
        Ok(worst)
    }
}
