//! Block-triangular seeds `U = [[U₁, U₃], [0, U₂]]` for the block-diagonal free
//! operator `H = 𝕊₁⊗h₁ + 𝕊₂⊗h₂`.
//!
//! `U₃` solves `h₁U₃ = U₃Λ₂`, so `HU = UΛ` with `Λ = diag(ε₁, ε₂, ε₃, ε₄)`. The
//! coupling block makes `UₓU⁻¹` non-block-diagonal and `H̃` generically
//! non-Hermitian; the missing states then belong to `H̃†`.

use num_complex::Complex64 as C64;

use crate::darboux2::{build_seed, missing_state, regularity_on, transform_with, Seed2x2};
use crate::dirac::{
    adjoint_intertwining_residual, intertwining_residual, BoundState, DarbouxOptions, DarbouxPair, DiracOperator, SeedMatrix,
};
use crate::error::{Error, Result};
use crate::field::{MatrixField, SpinorField};
use crate::free::{gamma2, FreeParams};
use crate::numerics::{invert, max_abs, Grid, Mat2, Mat4, Vector};
use crate::pauli::{block, block_diag, from_blocks, kron, sigma0, sigma2, sigma3};

/// Parameters of a block-triangular seed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockParams {
    pub params1: FreeParams,
    pub params2: FreeParams,
    /// `ε₁ … ε₄`.
    pub eps: [f64; 4],
    /// `δ₁ … δ₄`.
    pub delta: [f64; 4],
    /// `δ̄₃, δ̄₄` of the coupling block.
    pub delta_bar: [f64; 2],
    /// `false` sets `U₃ ≡ 0`.
    pub coupled: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockSeed {
    pub seed1: Seed2x2,
    pub seed2: Seed2x2,
    /// `U₃`: block-1 solutions at `ε₃, ε₄`.
    pub coupling: Option<Seed2x2>,
}

pub fn build_block_seed(p: &BlockParams) -> Result<BlockSeed> {
    build_block_seed_on(p, &Grid::default())
}

pub fn build_block_seed_on(p: &BlockParams, grid: &Grid) -> Result<BlockSeed> {
    let [e1, e2, e3, e4] = p.eps;
    let [d1, d2, d3, d4] = p.delta;
    let seed1 = build_seed(p.params1, e1, e2, d1, d2)?;
    let seed2 = build_seed(p.params2, e3, e4, d3, d4)?;
    for s in [&seed1, &seed2] {
        if let Some(x) = regularity_on(s, grid).node_location {
            return Err(Error::SingularSeed { x });
        }
    }
    let coupling = if p.coupled { Some(build_seed(p.params1, e3, e4, p.delta_bar[0], p.delta_bar[1])?) } else { None };
    Ok(BlockSeed { seed1, seed2, coupling })
}

impl BlockSeed {
    pub fn lambda1(&self) -> [f64; 2] {
        [self.seed1.eps1, self.seed1.eps2]
    }

    pub fn lambda2(&self) -> [f64; 2] {
        [self.seed2.eps1, self.seed2.eps2]
    }

    pub fn energies(&self) -> [f64; 4] {
        [self.seed1.eps1, self.seed1.eps2, self.seed2.eps1, self.seed2.eps2]
    }

    pub fn u3(&self, x: f64) -> Mat2 {
        self.coupling.map_or_else(Mat2::zeros, |s| s.u(x))
    }

    fn u3_x(&self, x: f64) -> Mat2 {
        self.coupling.map_or_else(Mat2::zeros, |s| s.u_x(x))
    }

    pub fn u(&self, x: f64) -> Mat4 {
        from_blocks(&self.seed1.u(x), &self.u3(x), &Mat2::zeros(), &self.seed2.u(x))
    }

    pub fn u_x(&self, x: f64) -> Mat4 {
        from_blocks(&self.seed1.u_x(x), &self.u3_x(x), &Mat2::zeros(), &self.seed2.u_x(x))
    }

    /// `[[U₁⁻¹, −U₁⁻¹U₃U₂⁻¹], [0, U₂⁻¹]]`.
    pub fn inverse_at(&self, x: f64) -> Result<Mat4> {
        let i1 = invert(&self.seed1.u(x))?;
        let i2 = invert(&self.seed2.u(x))?;
        Ok(from_blocks(&i1, &(-(i1 * self.u3(x) * i2)), &Mat2::zeros(), &i2))
    }

    /// `det U₁ · det U₂` in closed form.
    pub fn det(&self, x: f64) -> C64 {
        self.seed1.det_closed_form(x) * self.seed2.det_closed_form(x)
    }

    pub fn seed_matrix(&self) -> SeedMatrix<4> {
        let (a, b) = (*self, *self);
        SeedMatrix::from_matrix_with_derivative(move |x| a.u(x), move |x| b.u_x(x), self.energies()).expect("finite energies")
    }

    /// `𝕊₁⊗h₁ + 𝕊₂⊗h₂` with the free blocks.
    pub fn original_operator(&self) -> DiracOperator<4> {
        let m = block_diag(&self.seed1.params.matrix(), &self.seed2.params.matrix());
        DiracOperator::new(block_gamma(), MatrixField::constant(m).with_asymptotics(m, m)).expect("valid gamma")
    }

    /// `UₓU⁻¹` through the closed-form inverse.
    pub fn kernel_at(&self, x: f64) -> Result<Mat4> {
        Ok(self.u_x(x) * self.inverse_at(x)?)
    }

    /// Column `k` of `(U⁻¹)†` with its analytic derivative `−(U⁻¹UₓU⁻¹)†`.
    pub fn adjoint_state(&self, k: usize) -> SpinorField<4> {
        let (a, b) = (*self, *self);
        let nan = || Vector::<4>::from_element(C64::new(f64::NAN, 0.0));
        SpinorField::with_derivative(
            move |x| a.inverse_at(x).map_or_else(|_| nan(), |inv| inv.adjoint().column(k).into_owned()),
            move |x| match b.inverse_at(x) {
                Ok(inv) => (-(inv * b.u_x(x) * inv)).adjoint().column(k).into_owned(),
                Err(_) => nan(),
            },
        )
    }
}

/// `−iσ₀⊗σ₁`, the derivative coefficient of `𝕊₁⊗h₁ + 𝕊₂⊗h₂`.
pub fn block_gamma() -> Mat4 {
    kron(&sigma0(), &gamma2())
}

/// Output of [`nonreducible_transform`].
#[derive(Clone, Debug)]
pub struct NonHermitianResult {
    pub seed: BlockSeed,
    pub original: DiracOperator<4>,
    pub h_tilde: DiracOperator<4>,
    pub kernel: MatrixField<4>,
    /// `sup |Ṽ − Ṽ†|` on the grid.
    pub hermiticity_defect: f64,
    /// `sup` of the `σ₂, σ₃` part of the upper kernel block.
    pub restoring_residual: f64,
    /// `sup` of the lower-left block of `Ṽ − V`.
    pub lower_left_defect: f64,
    /// Distance of the diagonal blocks from the closed-form 2x2 potentials.
    pub diagonal_block_discrepancy: f64,
}

impl NonHermitianResult {
    /// Upper-right block of `UₓU⁻¹`: `U₃ₓU₂⁻¹ − U₁ₓU₁⁻¹U₃U₂⁻¹`.
    pub fn upper_block(&self, x: f64) -> Mat2 {
        block(&self.kernel.at(x), 0, 1)
    }

    pub fn darboux_pair(&self) -> DarbouxPair<4> {
        DarbouxPair {
            transformed: self.h_tilde.clone(),
            intertwiner_kernel: self.kernel.clone(),
            original: self.original.clone(),
            seed: self.seed.seed_matrix(),
        }
    }

    pub fn intertwining_residual(&self, grid: &Grid, step: f64) -> f64 {
        let pair = self.darboux_pair();
        intertwining_residual(&pair.original, &pair.transformed, &pair, &[], grid, step)
    }

    /// Residual of `L†H̃† = HL†`.
    pub fn adjoint_intertwining_residual(&self, grid: &Grid, step: f64) -> f64 {
        let pair = self.darboux_pair();
        adjoint_intertwining_residual(&pair.original, &pair.transformed, &pair, &[], grid, step)
    }
}

pub fn nonreducible_transform(h: &DiracOperator<4>, seed: &BlockSeed) -> Result<NonHermitianResult> {
    nonreducible_transform_on(h, seed, &DarbouxOptions::default())
}

pub fn nonreducible_transform_on(h: &DiracOperator<4>, seed: &BlockSeed, opts: &DarbouxOptions) -> Result<NonHermitianResult> {
    let original = seed.original_operator();
    let mismatch = opts
        .grid
        .points()
        .map(|x| max_abs(&(h.potential().at(x) - original.potential().at(x))))
        .fold(max_abs(&(h.gamma() - original.gamma())), f64::max);
    if !(mismatch < 1e-12) {
        return Err(Error::InvalidInput(format!("operator does not match the seed's block operators (distance {mismatch:.3e})")));
    }
    let residual = seed.seed_matrix().residual(&original, &opts.grid, opts.step);
    if !(residual < opts.tol_seed) {
        return Err(Error::InvalidSeed(format!("block seed columns are not eigensolutions (relative residual {residual:.3e})")));
    }
    let s = *seed;
    let nan = Mat4::from_element(C64::new(f64::NAN, 0.0));
    let kernel = MatrixField::new(move |x| s.kernel_at(x).unwrap_or(nan));
    let gamma = block_gamma();
    let v0 = original.potential().clone();
    let k2 = kernel.clone();
    let potential = MatrixField::new(move |x| {
        let k = k2.at(x);
        v0.at(x) + gamma * k - k * gamma
    });
    let h_tilde = DiracOperator::new_on(gamma, potential, &opts.grid)?;

    let (t1, t2) = (transform_with(&seed.seed1, opts)?, transform_with(&seed.seed2, opts)?);
    let mut result = NonHermitianResult {
        seed: *seed,
        original,
        h_tilde,
        kernel,
        hermiticity_defect: 0.0,
        restoring_residual: 0.0,
        lower_left_defect: 0.0,
        diagonal_block_discrepancy: 0.0,
    };
    for x in opts.grid.points() {
        let vt = result.h_tilde.potential().at(x);
        let dv = vt - result.original.potential().at(x);
        let kb = result.upper_block(x);
        let off_span = ((sigma2() * kb).trace() * 0.5).norm().hypot(((sigma3() * kb).trace() * 0.5).norm());
        let diag = max_abs(&(block(&vt, 0, 0) - t1.potential_at(x))).max(max_abs(&(block(&vt, 1, 1) - t2.potential_at(x))));
        let nanmax = |a: f64, b: f64| if b.is_nan() { f64::INFINITY } else { a.max(b) };
        result.hermiticity_defect = nanmax(result.hermiticity_defect, max_abs(&(vt - vt.adjoint())));
        result.restoring_residual = nanmax(result.restoring_residual, off_span);
        result.lower_left_defect = nanmax(result.lower_left_defect, max_abs(&block(&dv, 1, 0)));
        result.diagonal_block_discrepancy = nanmax(result.diagonal_block_discrepancy, diag);
    }
    if !(result.diagonal_block_discrepancy < crate::darboux2::ORACLE_TOL) {
        return Err(Error::OracleMismatch(result.diagonal_block_discrepancy));
    }
    Ok(result)
}

/// Missing eigenstates of `H̃†`.
#[derive(Clone, Debug)]
pub struct AdjointMissingSet {
    pub states: Vec<BoundState<4>>,
}

impl AdjointMissingSet {
    pub fn density(&self, k: usize, x: f64) -> f64 {
        self.states[k].density(x)
    }
}

pub fn adjoint_missing_states(seed: &BlockSeed, grid: &Grid) -> Result<AdjointMissingSet> {
    let opts = DarbouxOptions { grid: *grid, ..Default::default() };
    let result = nonreducible_transform_on(&seed.original_operator(), seed, &opts)?;
    let h_adj = result.h_tilde.adjoint();
    let rate = 0.5 * [seed.seed1.kappa1, seed.seed1.kappa2, seed.seed2.kappa1, seed.seed2.kappa2].into_iter().fold(f64::INFINITY, f64::min);
    let states = seed
        .energies()
        .iter()
        .enumerate()
        .map(|(k, &e)| BoundState::classify(&h_adj, e, seed.adjoint_state(k), grid, rate))
        .collect();
    Ok(AdjointMissingSet { states })
}

/// Normalized density of the separable counterpart of state `k` (the closed-form
/// 2x2 missing state of the corresponding block).
pub fn separable_density(seed: &BlockSeed, k: usize, grid: &Grid) -> Result<impl Fn(f64) -> f64> {
    let (s, which) = match k {
        0 => (seed.seed1, 1),
        1 => (seed.seed1, 2),
        2 => (seed.seed2, 1),
        3 => (seed.seed2, 2),
        _ => return Err(Error::InvalidInput(format!("state index {k} out of range"))),
    };
    let st = missing_state(&s, which);
    let norm2 = crate::numerics::simpson_integrate(|x| st.density(x), grid)?;
    Ok(move |x: f64| st.density(x) / norm2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac::{darboux_with, RESIDUAL_STEP};
    use crate::numerics::{c, determinant};

    fn fig4(coupled: bool) -> BlockParams {
        BlockParams {
            params1: FreeParams::new(3.0, -2.0, c(0.0, 1.0)),
            params2: FreeParams::new(2.5, -1.5, c(1.0, 0.0)),
            eps: [1.25, 0.25, 0.75, -0.5],
            delta: [1.0, -1.0, 0.0, 0.0],
            delta_bar: [0.0, 0.0],
            coupled,
        }
    }

    #[test]
    fn closed_form_inverse_and_determinant() {
        let s = build_block_seed(&fig4(true)).unwrap();
        for i in 0..100 {
            let x = -10.0 + 0.2 * i as f64;
            let closed = s.inverse_at(x).unwrap();
            let numeric = invert(&s.u(x)).unwrap();
            assert!(max_abs(&(closed - numeric)) < 1e-10 * max_abs(&closed).max(1.0));
            let d = determinant(&s.u(x));
            assert!((d - s.det(x)).norm() < 1e-10 * d.norm());
        }
    }

    #[test]
    fn fig4_breaks_hermiticity() {
        let s = build_block_seed(&fig4(true)).unwrap();
        let r = nonreducible_transform(&s.original_operator(), &s).unwrap();
        assert!(r.hermiticity_defect > 1e-3);
        assert!(!r.h_tilde.is_hermitian());
        assert!(r.restoring_residual > 1e-3);
        assert_eq!(r.lower_left_defect, 0.0);
        assert!(r.diagonal_block_discrepancy < 1e-8);
        let grid = Grid::default();
        assert!(r.intertwining_residual(&grid, RESIDUAL_STEP) < 1e-6);
        assert!(r.adjoint_intertwining_residual(&grid, RESIDUAL_STEP) < 1e-6);
    }

    #[test]
    fn uncoupled_seed_is_hermitian() {
        let s = build_block_seed(&fig4(false)).unwrap();
        let r = nonreducible_transform(&s.original_operator(), &s).unwrap();
        assert!(r.hermiticity_defect < 1e-12, "{}", r.hermiticity_defect);
        assert!(r.restoring_residual < 1e-12);
    }

    #[test]
    fn engine_agrees_with_closed_form_kernel() {
        let s = build_block_seed(&fig4(true)).unwrap();
        let r = nonreducible_transform(&s.original_operator(), &s).unwrap();
        let grid = Grid::new(-12.0, 12.0, 1201).unwrap();
        let opts = DarbouxOptions { grid, ..Default::default() };
        let pair = darboux_with(&s.original_operator(), &s.seed_matrix(), &opts).unwrap();
        for x in grid.points() {
            assert!(max_abs(&(pair.transformed.potential().at(x) - r.h_tilde.potential().at(x))) < 1e-8);
        }
    }

    #[test]
    fn adjoint_missing_states_fig4() {
        let grid = Grid::default();
        let s = build_block_seed(&fig4(true)).unwrap();
        let set = adjoint_missing_states(&s, &grid).unwrap();
        assert_eq!(set.states.len(), 4);
        for st in &set.states {
            assert!(st.finite_norm, "{}", st.energy);
            assert!(st.residual < 1e-8, "{} {}", st.energy, st.residual);
        }
        for k in [2, 3] {
            let sep = separable_density(&s, k, &grid).unwrap();
            for x in grid.points().step_by(50) {
                assert!((set.density(k, x) - sep(x)).abs() < 1e-8);
            }
        }
        let sep0 = separable_density(&s, 0, &grid).unwrap();
        let diff = grid.points().map(|x| (set.density(0, x) - sep0(x)).abs()).fold(0.0, f64::max);
        assert!(diff > 1e-4, "{diff}");
    }

    #[test]
    fn mismatched_operator_is_rejected() {
        let s = build_block_seed(&fig4(true)).unwrap();
        let other = build_block_seed(&BlockParams { params2: FreeParams::new(2.0, -1.5, c(1.0, 0.0)), ..fig4(true) }).unwrap();
        assert!(matches!(nonreducible_transform(&other.original_operator(), &s), Err(Error::InvalidInput(_))));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]

        #[test]
        fn closed_form_inverse_holds(eps in proptest::array::uniform4(-1.2..2.2f64), d in proptest::array::uniform4(-1.0..1.0f64)) {
            let params = BlockParams { eps, delta: d, delta_bar: [d[3], d[2]], ..fig4(true) };
            if let Ok(s) = build_block_seed(&params) {
                for x in [-3.0, -0.4, 0.0, 1.7, 3.0] {
                    let u = s.u(x);
                    let inv = s.inverse_at(x).unwrap();
                    let scale = max_abs(&u) * max_abs(&inv);
                    proptest::prop_assert!(max_abs(&(u * inv - Mat4::identity())) < 1e-10 * scale.max(1.0));
                }
            }
        }
    }
}
