//! Generic `N×N` Darboux engine for operators `H = γ∂ₓ + V(x)`.
//!
//! A seed matrix `U` of eigensolutions (`H U = U Λ`, `Λ` real diagonal)
//! defines the intertwiner `L = ∂ₓ − UₓU⁻¹` and the partner operator
//! `H̃ = γ∂ₓ + V + [γ, UₓU⁻¹]` with `L H = H̃ L`. The columns of `(U⁻¹)†`
//! solve `H̃ Φ̃ = ε_k Φ̃`. The closed-form modules are validated against this
//! engine.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{MatrixField, MatrixFn, SpinorField, FALLBACK_STEP};
use crate::numerics::{
    central_derivative, determinant, invert, max_abs, simpson_integrate, tail_decay_rates, FieldValue, Grid, Mat,
    Vector, SINGULAR_THRESHOLD,
};

/// Difference step used for residual checks.
pub const RESIDUAL_STEP: f64 = 1e-3;
/// Default bound on the relative residual of seed columns.
pub const DEFAULT_TOL_SEED: f64 = 1e-8;
/// Pointwise bound on `|V − V†|` for an operator to count as Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Grid samples skipped at each end when evaluating residuals.
pub const INTERIOR_MARGIN: usize = 2;

fn nan_vector<const N: usize>() -> Vector<N> {
    Vector::<N>::from_element(C64::new(f64::NAN, 0.0))
}

fn nan_matrix<const N: usize>() -> Mat<N> {
    Mat::<N>::from_element(C64::new(f64::NAN, 0.0))
}

/// First-order matrix differential operator `lead·∂ₓ + zeroth(x)`.
#[derive(Clone, Debug)]
pub struct FirstOrderOperator<const N: usize> {
    pub lead: Mat<N>,
    pub zeroth: MatrixField<N>,
}

impl<const N: usize> FirstOrderOperator<N> {
    pub fn new(lead: Mat<N>, zeroth: MatrixField<N>) -> Self {
        FirstOrderOperator { lead, zeroth }
    }

    pub fn apply_fn(&self, f: &dyn Fn(f64) -> Vector<N>, x: f64, h: f64) -> Result<Vector<N>> {
        let d = central_derivative(f, x, h)?;
        Ok(self.lead * d + self.zeroth.at(x) * f(x))
    }

    pub fn apply(&self, psi: &SpinorField<N>, x: f64, h: f64) -> Result<Vector<N>> {
        self.apply_fn(&|y| psi.at(y), x, h)
    }

    /// `(self ∘ inner) ψ` at `x`, both derivatives by stencils of step `h`.
    pub fn compose_at(&self, inner: &FirstOrderOperator<N>, psi: &SpinorField<N>, x: f64, h: f64) -> Result<Vector<N>> {
        let inner_fn = |y: f64| inner.apply(psi, y, h).unwrap_or_else(|_| nan_vector());
        self.apply_fn(&inner_fn, x, h)
    }
}

/// Sup over interior grid points and test spinors of `|(a∘b − c∘d)ψ|`.
///
/// Non-finite intermediate values give `+∞`.
pub fn composition_residual<const N: usize>(
    (a, b): (&FirstOrderOperator<N>, &FirstOrderOperator<N>),
    (c, d): (&FirstOrderOperator<N>, &FirstOrderOperator<N>),
    tests: &[SpinorField<N>],
    grid: &Grid,
    h: f64,
) -> f64 {
    let xs: Vec<f64> = grid.interior(INTERIOR_MARGIN).collect();
    xs.par_iter()
        .map(|&x| {
            tests
                .iter()
                .map(|psi| match (a.compose_at(b, psi, x, h), c.compose_at(d, psi, x, h)) {
                    (Ok(l), Ok(r)) => max_abs(&(l - r)),
                    _ => f64::INFINITY,
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, |p: f64, q: f64| if p.is_nan() || q.is_nan() { f64::INFINITY } else { p.max(q) })
}

/// `H = γ∂ₓ + V(x)` with `γ† = −γ` invertible.
#[derive(Clone, Debug)]
pub struct DiracOperator<const N: usize> {
    gamma: Mat<N>,
    gamma_inv: Mat<N>,
    potential: MatrixField<N>,
    hermitian: bool,
}

/// Builds an operator, sampling Hermiticity of `V` on the default grid.
pub fn make_operator<const N: usize>(gamma: Mat<N>, potential: MatrixField<N>) -> Result<DiracOperator<N>> {
    DiracOperator::new(gamma, potential)
}

impl<const N: usize> DiracOperator<N> {
    pub fn new(gamma: Mat<N>, potential: MatrixField<N>) -> Result<Self> {
        Self::new_on(gamma, potential, &Grid::default())
    }

    /// Like [`DiracOperator::new`] with the Hermiticity flag sampled on `grid`.
    pub fn new_on(gamma: Mat<N>, potential: MatrixField<N>, grid: &Grid) -> Result<Self> {
        if !FieldValue::is_finite(&gamma) || max_abs(&(gamma + gamma.adjoint())) > 1e-12 * max_abs(&gamma).max(1.0) {
            return Err(Error::InvalidOperator("gamma is not anti-Hermitian".into()));
        }
        let gamma_inv = invert(&gamma).map_err(|_| Error::InvalidOperator("gamma is singular".into()))?;
        let hermitian = hermiticity_defect(&potential, grid) <= HERMITICITY_TOL;
        Ok(DiracOperator { gamma, gamma_inv, potential, hermitian })
    }

    pub fn gamma(&self) -> Mat<N> {
        self.gamma
    }

    pub fn gamma_inverse(&self) -> Mat<N> {
        self.gamma_inv
    }

    pub fn potential(&self) -> &MatrixField<N> {
        &self.potential
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Same `γ`, new potential.
    pub fn with_potential(&self, potential: MatrixField<N>) -> Result<Self> {
        Self::new(self.gamma, potential)
    }

    /// `(Hψ)(x) = γψ'(x) + V(x)ψ(x)` with a five-point derivative of step `h`.
    pub fn apply(&self, psi: &SpinorField<N>, x: f64, h: f64) -> Result<Vector<N>> {
        let d = central_derivative(|y| psi.at(y), x, h)?;
        Ok(self.gamma * d + self.potential.at(x) * psi.at(x))
    }

    /// `H† = γ∂ₓ + V†` as a differential operator.
    pub fn adjoint(&self) -> Self {
        DiracOperator {
            gamma: self.gamma,
            gamma_inv: self.gamma_inv,
            potential: self.potential.adjoint(),
            hermitian: self.hermitian,
        }
    }

    pub fn first_order(&self) -> FirstOrderOperator<N> {
        FirstOrderOperator::new(self.gamma, self.potential.clone())
    }

    /// Sup over interior grid points of `|(H − ε)ψ|`.
    pub fn residual_sup(&self, eps: f64, psi: &SpinorField<N>, grid: &Grid, h: f64) -> f64 {
        let xs: Vec<f64> = grid.interior(INTERIOR_MARGIN).collect();
        xs.par_iter()
            .map(|&x| match self.apply(psi, x, h) {
                Ok(v) => {
                    let r = max_abs(&(v - psi.at(x) * C64::new(eps, 0.0)));
                    if r.is_nan() {
                        f64::INFINITY
                    } else {
                        r
                    }
                }
                Err(_) => f64::INFINITY,
            })
            .reduce(|| 0.0, f64::max)
    }
}

/// Sup over `grid` of `|V(x) − V(x)†|`.
pub fn hermiticity_defect<const N: usize>(potential: &MatrixField<N>, grid: &Grid) -> f64 {
    let xs: Vec<f64> = grid.points().collect();
    xs.par_iter()
        .map(|&x| {
            let v = potential.at(x);
            let d = max_abs(&(v - v.adjoint()));
            if d.is_nan() {
                f64::INFINITY
            } else {
                d
            }
        })
        .reduce(|| 0.0, f64::max)
}

/// Matrix `U(x)` whose columns solve `H Φ_k = ε_k Φ_k`.
#[derive(Clone)]
pub struct SeedMatrix<const N: usize> {
    value: MatrixFn<N>,
    derivative: Option<MatrixFn<N>>,
    energies: [f64; N],
}

impl<const N: usize> fmt::Debug for SeedMatrix<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SeedMatrix")
            .field("energies", &self.energies)
            .field("analytic_derivative", &self.derivative.is_some())
            .finish_non_exhaustive()
    }
}

fn check_energies<const N: usize>(energies: &[f64; N]) -> Result<()> {
    if energies.iter().all(|e| e.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidSeed("factorization energies must be finite reals".into()))
    }
}

impl<const N: usize> SeedMatrix<N> {
    pub fn from_columns(columns: Vec<SpinorField<N>>, energies: [f64; N]) -> Result<Self> {
        check_energies(&energies)?;
        if columns.len() != N {
            return Err(Error::InvalidSeed(format!("expected {N} columns, got {}", columns.len())));
        }
        let cols = Arc::new(columns);
        let analytic = cols.iter().all(|c| c.has_derivative());
        let vc = cols.clone();
        let value: MatrixFn<N> = Arc::new(move |x| Mat::<N>::from_fn(|r, k| vc[k].at(x)[r]));
        let derivative: Option<MatrixFn<N>> = analytic.then(|| {
            let dc = cols.clone();
            let f: MatrixFn<N> = Arc::new(move |x| {
                let ds: Vec<Vector<N>> =
                    dc.iter().map(|c| c.derivative_at(x, FALLBACK_STEP).unwrap_or_else(|_| nan_vector())).collect();
                Mat::<N>::from_fn(|r, k| ds[k][r])
            });
            f
        });
        Ok(SeedMatrix { value, derivative, energies })
    }

    pub fn from_matrix(value: impl Fn(f64) -> Mat<N> + Send + Sync + 'static, energies: [f64; N]) -> Result<Self> {
        check_energies(&energies)?;
        Ok(SeedMatrix { value: Arc::new(value), derivative: None, energies })
    }

    pub fn from_matrix_with_derivative(
        value: impl Fn(f64) -> Mat<N> + Send + Sync + 'static,
        derivative: impl Fn(f64) -> Mat<N> + Send + Sync + 'static,
        energies: [f64; N],
    ) -> Result<Self> {
        check_energies(&energies)?;
        Ok(SeedMatrix { value: Arc::new(value), derivative: Some(Arc::new(derivative)), energies })
    }

    pub fn energies(&self) -> [f64; N] {
        self.energies
    }

    pub fn at(&self, x: f64) -> Mat<N> {
        (self.value)(x)
    }

    pub fn has_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    /// `Uₓ(x)`, analytic when available, else a five-point stencil of step 1e-4.
    pub fn derivative_at(&self, x: f64) -> Result<Mat<N>> {
        match &self.derivative {
            Some(d) => Ok(d(x)),
            None => central_derivative(|y| self.at(y), x, FALLBACK_STEP),
        }
    }

    pub fn column(&self, k: usize) -> SpinorField<N> {
        let value = self.value.clone();
        match self.derivative.clone() {
            Some(d) => SpinorField::with_derivative(move |x| value(x).column(k).into_owned(), move |x| d(x).column(k).into_owned()),
            None => SpinorField::new(move |x| value(x).column(k).into_owned()),
        }
    }

    /// `Uₓ(x) U(x)⁻¹`.
    pub fn kernel_at(&self, x: f64) -> Result<Mat<N>> {
        let inv = invert(&self.at(x)).map_err(|_| Error::SingularSeed { x })?;
        Ok(self.derivative_at(x)? * inv)
    }

    /// Largest relative residual `|(H − ε_k)Φ_k| / |Φ_k|` over interior grid points,
    /// derivatives by stencils of step `h` so that closed-form derivatives are not trusted.
    pub fn residual(&self, h_op: &DiracOperator<N>, grid: &Grid, h: f64) -> f64 {
        let xs: Vec<f64> = grid.interior(INTERIOR_MARGIN).collect();
        let gamma = h_op.gamma();
        xs.par_iter()
            .map(|&x| {
                let u = self.at(x);
                let Ok(ux) = central_derivative(|y| self.at(y), x, h) else {
                    return f64::INFINITY;
                };
                let r = gamma * ux + h_op.potential().at(x) * u;
                (0..N)
                    .map(|k| {
                        let col = u.column(k);
                        let res = max_abs(&(r.column(k) - col * C64::new(self.energies[k], 0.0)).into_owned());
                        let scale = max_abs(&col.into_owned());
                        if scale > 0.0 {
                            res / scale
                        } else {
                            f64::INFINITY
                        }
                    })
                    .fold(0.0, |a: f64, b: f64| if b.is_nan() { f64::INFINITY } else { a.max(b) })
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Rejects seeds whose column-normalized determinant vanishes or changes
    /// phase abruptly (a node between samples) on `grid`.
    pub fn scan_determinant(&self, grid: &Grid, threshold: f64) -> Result<()> {
        let xs: Vec<f64> = grid.points().collect();
        let normalized: Vec<C64> = xs
            .par_iter()
            .map(|&x| {
                let u = self.at(x);
                let prod: f64 = (0..N).map(|k| u.column(k).norm()).product();
                if prod > 0.0 && prod.is_finite() {
                    determinant(&u) / prod
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect();
        for (i, d) in normalized.iter().enumerate() {
            if !(d.norm() >= threshold) {
                return Err(Error::SingularSeed { x: xs[i] });
            }
            if i > 0 && (d * normalized[i - 1].conj()).re < 0.0 {
                return Err(Error::SingularSeed { x: 0.5 * (xs[i] + xs[i - 1]) });
            }
        }
        Ok(())
    }
}

/// Knobs of [`darboux_with`].
#[derive(Clone, Copy, Debug)]
pub struct DarbouxOptions {
    pub grid: Grid,
    pub tol_seed: f64,
    pub singular_threshold: f64,
    pub step: f64,
}

impl Default for DarbouxOptions {
    fn default() -> Self {
        DarbouxOptions {
            grid: Grid::default(),
            tol_seed: DEFAULT_TOL_SEED,
            singular_threshold: SINGULAR_THRESHOLD,
            step: RESIDUAL_STEP,
        }
    }
}

/// Output of [`darboux`]: `H̃` and the kernel `UₓU⁻¹` of `L = ∂ₓ − UₓU⁻¹`.
#[derive(Clone, Debug)]
pub struct DarbouxPair<const N: usize> {
    pub transformed: DiracOperator<N>,
    pub intertwiner_kernel: MatrixField<N>,
    pub original: DiracOperator<N>,
    pub seed: SeedMatrix<N>,
}

impl<const N: usize> DarbouxPair<N> {
    /// `L = ∂ₓ − K`.
    pub fn intertwiner(&self) -> FirstOrderOperator<N> {
        FirstOrderOperator::new(Mat::<N>::identity(), self.intertwiner_kernel.map(|k| -k))
    }

    /// `L† = −∂ₓ − K†`.
    pub fn intertwiner_adjoint(&self) -> FirstOrderOperator<N> {
        FirstOrderOperator::new(-Mat::<N>::identity(), self.intertwiner_kernel.map(|k| -k.adjoint()))
    }
}

/// `Ṽ = V + [γ, K]` as a field.
pub fn transformed_potential<const N: usize>(gamma: Mat<N>, v: &MatrixField<N>, kernel: &MatrixField<N>) -> MatrixField<N> {
    let v = v.clone();
    let k = kernel.clone();
    MatrixField::new(move |x| {
        let kx = k.at(x);
        v.at(x) + gamma * kx - kx * gamma
    })
}

pub fn darboux<const N: usize>(h: &DiracOperator<N>, seed: &SeedMatrix<N>) -> Result<DarbouxPair<N>> {
    darboux_with(h, seed, &DarbouxOptions::default())
}

pub fn darboux_with<const N: usize>(h: &DiracOperator<N>, seed: &SeedMatrix<N>, opts: &DarbouxOptions) -> Result<DarbouxPair<N>> {
    let residual = seed.residual(h, &opts.grid, opts.step);
    if !(residual < opts.tol_seed) {
        return Err(Error::InvalidSeed(format!(
            "seed columns are not eigensolutions (relative residual {residual:.3e} > {:.1e})",
            opts.tol_seed
        )));
    }
    seed.scan_determinant(&opts.grid, opts.singular_threshold)?;
    let s = seed.clone();
    let kernel = MatrixField::new(move |x| s.kernel_at(x).unwrap_or_else(|_| nan_matrix()));
    let potential = transformed_potential(h.gamma(), h.potential(), &kernel);
    let transformed = DiracOperator::new_on(h.gamma(), potential, &opts.grid)?;
    Ok(DarbouxPair { transformed, intertwiner_kernel: kernel, original: h.clone(), seed: seed.clone() })
}

/// `(Lψ)(x) = ψ'(x) − K(x)ψ(x)`.
pub fn intertwine_apply<const N: usize>(pair: &DarbouxPair<N>, psi: &SpinorField<N>) -> SpinorField<N> {
    let kernel = pair.intertwiner_kernel.clone();
    let psi = psi.clone();
    SpinorField::new(move |x| match psi.derivative_at(x, FALLBACK_STEP) {
        Ok(d) => d - kernel.at(x) * psi.at(x),
        Err(_) => nan_vector(),
    })
}

/// Gaussian-enveloped plane wave `e^{−(x−x₀)²/(2s²)} e^{ikx} u`.
pub fn gaussian_packet<const N: usize>(k: f64, width: f64, center: f64, u: Vector<N>) -> SpinorField<N> {
    let f = move |x: f64| {
        let y = x - center;
        C64::new(-y * y / (2.0 * width * width), k * x).exp()
    };
    SpinorField::with_derivative(
        move |x| u * f(x),
        move |x| u * (f(x) * C64::new(-(x - center) / (width * width), k)),
    )
}

/// Three Gaussian packets at wavenumbers 0.5, 1.3, 2.1 with distinct polarizations.
pub fn default_test_spinors<const N: usize>() -> Vec<SpinorField<N>> {
    [0.5, 1.3, 2.1]
        .iter()
        .enumerate()
        .map(|(j, &k)| {
            let u = Vector::<N>::from_fn(|m, _| C64::new(1.0 + 0.25 * m as f64, 0.4 * ((m + j) % 3) as f64 - 0.3)).normalize();
            gaussian_packet(k, 1.5, 0.0, u)
        })
        .collect()
}

/// Sup of `|(LH − H̃L)ψ|` over interior points and `tests` (defaults when empty).
pub fn intertwining_residual<const N: usize>(
    h: &DiracOperator<N>,
    h_tilde: &DiracOperator<N>,
    pair: &DarbouxPair<N>,
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
    let l = pair.intertwiner();
    composition_residual((&l, &h.first_order()), (&h_tilde.first_order(), &l), tests, grid, step)
}

/// Sup of `|(L†H̃† − HL†)ψ|`; for Hermitian operators this is `HL† = L†H̃`.
pub fn adjoint_intertwining_residual<const N: usize>(
    h: &DiracOperator<N>,
    h_tilde: &DiracOperator<N>,
    pair: &DarbouxPair<N>,
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
    let ld = pair.intertwiner_adjoint();
    composition_residual((&ld, &h_tilde.adjoint().first_order()), (&h.first_order(), &ld), tests, grid, step)
}

/// An eigensolution with its norm bookkeeping.
///
/// `spinor` is normalized when `finite_norm` holds; `norm` is the norm before
/// normalization. `residual` is `sup |(H − ε)ψ|`, relative to `sup |ψ|` for
/// states without finite norm.
#[derive(Clone, Debug)]
pub struct BoundState<const N: usize> {
    pub energy: f64,
    pub spinor: SpinorField<N>,
    pub norm: f64,
    pub residual: f64,
    pub finite_norm: bool,
    pub decay_rate: f64,
}

impl<const N: usize> BoundState<N> {
    pub fn density(&self, x: f64) -> f64 {
        self.spinor.density(x)
    }

    /// Normalizes `spinor`, classifies its tails and measures its residual against `h`.
    pub fn classify(h: &DiracOperator<N>, energy: f64, spinor: SpinorField<N>, grid: &Grid, min_decay_rate: f64) -> Self {
        let norm = simpson_integrate(|x| spinor.density(x), grid).map(f64::sqrt).unwrap_or(f64::INFINITY);
        let (l, r) = tail_decay_rates(|x| spinor.density(x), grid);
        let decay_rate = l.min(r);
        let finite_norm = norm.is_finite() && norm > 0.0 && decay_rate >= min_decay_rate;
        if finite_norm {
            let spinor = spinor.scaled(C64::new(1.0 / norm, 0.0));
            let residual = h.residual_sup(energy, &spinor, grid, RESIDUAL_STEP);
            BoundState { energy, spinor, norm, residual, finite_norm, decay_rate }
        } else {
            let sup = grid.points().map(|x| spinor.density(x).sqrt()).fold(0.0, f64::max);
            let raw = h.residual_sup(energy, &spinor, grid, RESIDUAL_STEP);
            let residual = if sup > 0.0 { raw / sup } else { raw };
            BoundState { energy, spinor, norm, residual, finite_norm, decay_rate }
        }
    }
}

/// Columns of `(U⁻¹)†` paired with the factorization energies.
#[derive(Clone, Debug)]
pub struct MissingStateSet<const N: usize> {
    pub states: Vec<BoundState<N>>,
}

/// Default minimal amplitude decay rate for a missing state to count as normalizable.
pub const MIN_DECAY_RATE: f64 = 0.05;

/// Column `k` of `(U⁻¹)†` with derivative `−(U⁻¹UₓU⁻¹)†` column `k`.
pub fn inverse_adjoint_column<const N: usize>(seed: &SeedMatrix<N>, k: usize) -> SpinorField<N> {
    let s1 = seed.clone();
    let s2 = seed.clone();
    SpinorField::with_derivative(
        move |x| match invert(&s1.at(x)) {
            Ok(inv) => inv.adjoint().column(k).into_owned(),
            Err(_) => nan_vector(),
        },
        move |x| match (invert(&s2.at(x)), s2.derivative_at(x)) {
            (Ok(inv), Ok(ux)) => (-(inv * ux * inv)).adjoint().column(k).into_owned(),
            _ => nan_vector(),
        },
    )
}

pub fn missing_states<const N: usize>(
    seed: &SeedMatrix<N>,
    h_tilde: &DiracOperator<N>,
    grid: &Grid,
    min_decay_rate: f64,
) -> Result<MissingStateSet<N>> {
    seed.scan_determinant(grid, SINGULAR_THRESHOLD)?;
    let states = (0..N)
        .map(|k| BoundState::classify(h_tilde, seed.energies()[k], inverse_adjoint_column(seed, k), grid, min_decay_rate))
        .collect();
    Ok(MissingStateSet { states })
}
