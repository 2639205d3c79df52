//! Transfer-matrix scattering for operators with constant asymptotic potentials.
//!
//! The stationary equation is written as `ψ′ = γ⁻¹(E − V(x))ψ` and integrated
//! with fixed-step RK4 across a box `[−L, L]`. Outside the box the potential
//! is replaced by its limits, where solutions are `e^{μx}u` with `γ⁻¹(E − V±)u = μu`.
//! Propagating channels (`μ = ik`) are normalized to unit flux `|u†(iγ)u| = 1`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::darboux2::{asymptotics, Seed2x2};
use crate::dirac::{DiracOperator, RESIDUAL_STEP};
use crate::error::{Error, Result};
use crate::field::SpinorField;
use crate::free::{fundamental_psi, kappa};
use crate::numerics::{max_abs, simpson_integrate, tail_decay_rates, Grid, Mat, Vector, I};

/// Largest integration step.
pub const MAX_STEP: f64 = 1e-3;
/// Entries above this trigger renormalization of the propagated solution.
const RENORMALIZE_ABOVE: f64 = 1e150;
/// `|Re μ|` below this (relative to `1 + |μ|`) counts as propagating.
const PROPAGATING_TOL: f64 = 1e-9;
/// Eigenvalues closer than this belong to one degenerate cluster.
const CLUSTER_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug)]
pub struct ScatterOptions {
    pub step: f64,
    /// Box half-width; chosen automatically when `None`.
    pub halfwidth: Option<f64>,
    pub box_tol: f64,
    pub max_halfwidth: f64,
}

impl Default for ScatterOptions {
    fn default() -> Self {
        ScatterOptions { step: MAX_STEP, halfwidth: None, box_tol: 1e-10, max_halfwidth: 50.0 }
    }
}

/// Propagated solution `value · e^{log_scale}`.
#[derive(Clone, Debug)]
pub struct Propagated<const N: usize, const M: usize> {
    pub value: nalgebra::SMatrix<C64, N, M>,
    pub log_scale: f64,
}

fn generator<const N: usize>(h: &DiracOperator<N>, e: f64, x: f64) -> Mat<N> {
    let shift = Mat::<N>::identity() * C64::new(e, 0.0) - h.potential().at(x);
    h.gamma_inverse() * shift
}

/// RK4 for `Y′ = γ⁻¹(E − V)Y` from `x0` to `x1` with at most `step` per step.
pub fn propagate_columns<const N: usize, const M: usize>(
    h: &DiracOperator<N>,
    e: f64,
    x0: f64,
    x1: f64,
    y0: nalgebra::SMatrix<C64, N, M>,
    step: f64,
) -> Result<Propagated<N, M>> {
    if !(step > 0.0 && step.is_finite() && x0.is_finite() && x1.is_finite()) {
        return Err(Error::InvalidParameter(format!("invalid propagation interval [{x0}, {x1}] or step {step}")));
    }
    let n = (((x1 - x0).abs() / step).ceil() as usize).max(1);
    let dx = (x1 - x0) / n as f64;
    let mut y = y0;
    let mut log_scale = 0.0;
    let mut a0 = generator(h, e, x0);
    for i in 0..n {
        let x = x0 + dx * i as f64;
        let a_mid = generator(h, e, x + 0.5 * dx);
        let a1 = generator(h, e, if i + 1 == n { x1 } else { x + dx });
        let hdx = C64::new(dx, 0.0);
        let k1 = a0 * y;
        let k2 = a_mid * (y + k1 * (hdx * 0.5));
        let k3 = a_mid * (y + k2 * (hdx * 0.5));
        let k4 = a1 * (y + k3 * hdx);
        y += (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * (hdx / 6.0);
        a0 = a1;
        let size = max_abs(&y);
        if !size.is_finite() {
            return Err(Error::NumericalFailure(format!("propagation diverged at x = {x}")));
        }
        if size > RENORMALIZE_ABOVE {
            y /= C64::new(size, 0.0);
            log_scale += size.ln();
        }
    }
    Ok(Propagated { value: y, log_scale })
}

/// Solution at `x1` of the initial value problem `ψ(x0) = psi0`.
pub fn propagate<const N: usize>(h: &DiracOperator<N>, e: f64, x0: f64, x1: f64, psi0: Vector<N>, step: f64) -> Result<Vector<N>> {
    let p = propagate_columns(h, e, x0, x1, psi0, step)?;
    let out = p.value * C64::new(p.log_scale.exp(), 0.0);
    if out.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(out)
    } else {
        Err(Error::NumericalFailure(format!("solution overflows (log scale {:.1})", p.log_scale)))
    }
}

/// One asymptotic mode `e^{μx}u`.
#[derive(Clone, Debug)]
pub struct Channel<const N: usize> {
    pub mu: C64,
    pub spinor: Vector<N>,
    /// `u†(iγ)u`: ±1 for propagating modes, 0 for evanescent ones.
    pub velocity: f64,
}

impl<const N: usize> Channel<N> {
    pub fn momentum(&self) -> f64 {
        self.mu.im
    }

    pub fn is_propagating(&self) -> bool {
        self.velocity != 0.0
    }
}

/// Modes of the constant-coefficient problem on one side.
#[derive(Clone, Debug)]
pub struct Channels<const N: usize> {
    pub right_movers: Vec<Channel<N>>,
    pub left_movers: Vec<Channel<N>>,
    /// Modes growing to the right (`Re μ > 0`).
    pub growing: Vec<Channel<N>>,
    /// Modes decaying to the right (`Re μ < 0`).
    pub decaying: Vec<Channel<N>>,
}

impl<const N: usize> Channels<N> {
    pub fn propagating(&self) -> usize {
        self.right_movers.len() + self.left_movers.len()
    }
}

fn to_dmatrix<const N: usize>(m: &Mat<N>) -> DMatrix<C64> {
    DMatrix::from_column_slice(N, N, m.as_slice())
}

/// Orthonormal basis of the `dim` least singular directions of `m`.
fn null_space(m: &DMatrix<C64>, dim: usize) -> DMatrix<C64> {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    DMatrix::from_columns(&order[..dim].iter().map(|&i| v_t.row(i).adjoint()).collect::<Vec<_>>())
}

/// Channel decomposition of `γ⁻¹(E − V∞)`, flux-normalized.
pub fn channels<const N: usize>(gamma: &Mat<N>, v_inf: &Mat<N>, e: f64) -> Result<Channels<N>> {
    let gamma_inv = crate::numerics::invert(gamma)?;
    let a = gamma_inv * (Mat::<N>::identity() * C64::new(e, 0.0) - v_inf);
    let ad = to_dmatrix(&a);
    let eig = nalgebra::linalg::Schur::new(ad.clone())
        .eigenvalues()
        .ok_or_else(|| Error::NumericalFailure("asymptotic eigenvalues did not converge".into()))?;
    let mut mus: Vec<C64> = eig.iter().copied().collect();
    mus.sort_by(|p, q| p.re.total_cmp(&q.re).then(p.im.total_cmp(&q.im)));
    let mut clusters: Vec<Vec<C64>> = Vec::new();
    for mu in mus {
        match clusters.last_mut() {
            Some(c) if (c[0] - mu).norm() < CLUSTER_TOL * (1.0 + mu.norm()) => c.push(mu),
            _ => clusters.push(vec![mu]),
        }
    }
    let sigma = to_dmatrix(&(*gamma * I));
    let mut out = Channels { right_movers: vec![], left_movers: vec![], growing: vec![], decaying: vec![] };
    for cluster in clusters {
        let mu = cluster.iter().sum::<C64>() / cluster.len() as f64;
        let shifted = &ad - DMatrix::identity(N, N) * mu;
        let basis = null_space(&shifted, cluster.len());
        let residual = (&shifted * &basis).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if residual > 1e-8 * (1.0 + ad.norm()) {
            return Err(Error::NotScatteringEnergy {
                energy: e,
                reason: "asymptotic problem is not diagonalizable (band edge)".into(),
            });
        }
        let to_vec = |col: DVector<C64>| Vector::<N>::from_iterator(col.iter().copied());
        if mu.re.abs() < PROPAGATING_TOL * (1.0 + mu.norm()) {
            let form = basis.adjoint() * &sigma * &basis;
            let form = (&form + form.adjoint()) * C64::new(0.5, 0.0);
            let eigen = nalgebra::linalg::SymmetricEigen::new(form);
            for j in 0..cluster.len() {
                let u = &basis * eigen.eigenvectors.column(j);
                let vel = eigen.eigenvalues[j];
                if vel.abs() < 1e-10 {
                    return Err(Error::NotScatteringEnergy { energy: e, reason: "zero group velocity (band edge)".into() });
                }
                let spinor = to_vec(u / C64::new(vel.abs().sqrt(), 0.0));
                let ch = Channel { mu: C64::new(0.0, mu.im), spinor, velocity: vel.signum() };
                if vel > 0.0 { out.right_movers.push(ch) } else { out.left_movers.push(ch) }
            }
        } else {
            for j in 0..cluster.len() {
                let ch = Channel { mu, spinor: to_vec(basis.column(j).into_owned()), velocity: 0.0 };
                if mu.re > 0.0 { out.growing.push(ch) } else { out.decaying.push(ch) }
            }
        }
    }
    Ok(out)
}

/// Reflection and transmission for waves incident from the left.
#[derive(Clone, Debug)]
pub struct ScatteringResult {
    pub energy: f64,
    /// `R` for the first incident channel into the first reflected channel.
    pub r: C64,
    /// `T` for the first incident channel into the first transmitted channel.
    pub t: C64,
    /// Rows: reflected channels; columns: incident channels.
    pub reflection: DMatrix<C64>,
    /// Rows: transmitted channels; columns: incident channels.
    pub transmission: DMatrix<C64>,
    /// `max_j |Σ|R_ij|² + Σ|T_ij|² − 1|`.
    pub flux_defect: f64,
    pub box_halfwidth: f64,
}

impl ScatteringResult {
    pub fn max_reflection(&self) -> f64 {
        self.reflection.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Transmitted-flux amplitude `(Σ_i |T_i1|²)^{1/2}` of the first incident channel.
    pub fn transmitted_amplitude(&self) -> f64 {
        self.transmission.column(0).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Smallest half-width on the grid `1, 1.5, …` with `‖V(±L) − V±‖ < box_tol`, capped.
pub fn box_halfwidth<const N: usize>(h: &DiracOperator<N>, opts: &ScatterOptions) -> Result<f64> {
    if let Some(l) = opts.halfwidth {
        return Ok(l);
    }
    let (vm, vp) = h
        .potential()
        .asymptotics()
        .ok_or_else(|| Error::InvalidInput("the potential has no declared asymptotic limits".into()))?;
    let mut l: f64 = 1.0;
    while l < opts.max_halfwidth {
        let dm = max_abs(&(h.potential().at(-l) - vm));
        let dp = max_abs(&(h.potential().at(l) - vp));
        if dm < opts.box_tol && dp < opts.box_tol {
            return Ok(l);
        }
        l += 0.5;
    }
    Ok(opts.max_halfwidth)
}

pub fn reflection_transmission<const N: usize>(h: &DiracOperator<N>, e: f64) -> Result<ScatteringResult> {
    reflection_transmission_with(h, e, &ScatterOptions::default())
}

pub fn reflection_transmission_with<const N: usize>(h: &DiracOperator<N>, e: f64, opts: &ScatterOptions) -> Result<ScatteringResult> {
    if !e.is_finite() {
        return Err(Error::InvalidParameter(format!("energy {e} is not finite")));
    }
    let (vm, vp) = h
        .potential()
        .asymptotics()
        .ok_or_else(|| Error::InvalidInput("the potential has no declared asymptotic limits".into()))?;
    let left = channels(&h.gamma(), &vm, e)?;
    let right = channels(&h.gamma(), &vp, e)?;
    match (left.propagating(), right.propagating()) {
        (0, 0) => {
            return Err(Error::NotScatteringEnergy { energy: e, reason: "energy lies in the asymptotic gap on both sides".into() })
        }
        (0, _) | (_, 0) => {
            return Err(Error::OneSidedScattering { energy: e, reason: "channels are evanescent on one side only".into() })
        }
        _ => {}
    }
    let l = box_halfwidth(h, opts)?;
    let fundamental = propagate_columns(h, e, -l, l, Mat::<N>::identity(), opts.step)?;
    let phi = fundamental.value * C64::new(fundamental.log_scale.exp(), 0.0);
    if !phi.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NumericalFailure("transfer matrix overflow".into()));
    }
    // Propagating amplitudes are referenced to x = 0.
    let column = |ch: &Channel<N>, x: f64| if ch.is_propagating() { ch.spinor * (ch.mu * x).exp() } else { ch.spinor };
    let incident: Vec<Vector<N>> = left.right_movers.iter().map(|c| phi * column(c, -l)).collect();
    let mut unknown: Vec<Vector<N>> = Vec::new();
    for ch in left.left_movers.iter().chain(left.growing.iter()) {
        unknown.push(phi * column(ch, -l));
    }
    for ch in right.right_movers.iter().chain(right.decaying.iter()) {
        unknown.push(-column(ch, l));
    }
    if unknown.len() != N {
        return Err(Error::NumericalFailure(format!("{} boundary unknowns for a {N}-component problem", unknown.len())));
    }
    let system = DMatrix::from_columns(&unknown.iter().map(|v| DVector::from_column_slice(v.as_slice())).collect::<Vec<_>>());
    let lu = system.lu();
    let (n_ref, n_tr) = (left.left_movers.len(), right.right_movers.len());
    let mut reflection = DMatrix::zeros(n_ref, incident.len());
    let mut transmission = DMatrix::zeros(n_tr, incident.len());
    let mut flux_defect: f64 = 0.0;
    for (j, inc) in incident.iter().enumerate() {
        let rhs = -DVector::from_column_slice(inc.as_slice());
        let sol = lu.solve(&rhs).ok_or_else(|| Error::NumericalFailure("singular boundary system".into()))?;
        let off = n_ref + left.growing.len();
        for i in 0..n_ref {
            reflection[(i, j)] = sol[i];
        }
        for i in 0..n_tr {
            transmission[(i, j)] = sol[off + i];
        }
        let flux: f64 = reflection.column(j).iter().chain(transmission.column(j).iter()).map(|z| z.norm_sqr()).sum();
        flux_defect = flux_defect.max((flux - 1.0).abs());
    }
    let r = if n_ref > 0 { reflection[(0, 0)] } else { C64::new(0.0, 0.0) };
    let t = if n_tr > 0 { transmission[(0, 0)] } else { C64::new(0.0, 0.0) };
    if !(r.norm().is_finite() && t.norm().is_finite()) {
        return Err(Error::NumericalFailure("non-finite scattering amplitudes".into()));
    }
    Ok(ScatteringResult { energy: e, r, t, reflection, transmission, flux_defect, box_halfwidth: l })
}

/// Energy sweep, one independent computation per energy.
pub fn scatter_sweep<const N: usize>(h: &DiracOperator<N>, energies: &[f64], opts: &ScatterOptions) -> Vec<Result<ScatteringResult>> {
    energies.par_iter().map(|&e| reflection_transmission_with(h, e, opts)).collect()
}

/// Residual and norm of a candidate eigensolution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundStateCheck {
    /// `max |(H − ε)ψ|` over interior grid points.
    pub residual: f64,
    /// `(∫ Σ|ψ_k|²)^{1/2}`, `+∞` when the tails do not decay.
    pub norm: f64,
    pub finite_norm: bool,
}

pub fn bound_state_check<const N: usize>(h: &DiracOperator<N>, eps: f64, psi: &SpinorField<N>, grid: &Grid) -> BoundStateCheck {
    let residual = h.residual_sup(eps, psi, grid, RESIDUAL_STEP);
    let quad = simpson_integrate(|x| psi.density(x), grid).map(f64::sqrt).unwrap_or(f64::INFINITY);
    let (l, r) = tail_decay_rates(|x| psi.density(x), grid);
    let finite_norm = quad.is_finite() && l.min(r) >= crate::dirac::MIN_DECAY_RATE;
    let norm = if finite_norm || quad == 0.0 { quad } else { f64::INFINITY };
    BoundStateCheck { residual, norm, finite_norm }
}

/// Comparison of `Lψ_E` at large `|x|` with the two candidate asymptotic forms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsymptoticActionCheck {
    pub x: f64,
    /// `|Lψ − (κ_E + w±)ψ| / |ψ|`.
    pub plus_form: f64,
    /// `|Lψ − (μ − w±)ψ| / |ψ|` with `ψ ∼ e^{μx}` the dominant exponential.
    pub minus_form: f64,
}

/// Propagates `ψ_E` numerically from the origin to `x` and applies `L = ∂ₓ − UₓU⁻¹` there.
pub fn asymptotic_action(seed: &Seed2x2, energy: f64, x: f64, step: f64) -> Result<AsymptoticActionCheck> {
    let w = asymptotics(seed)?;
    let p = seed.params;
    let h = p.operator();
    let psi0 = fundamental_psi(energy, &p, C64::new(0.0, 0.0))?.at(0.0);
    let psi = propagate(&h, energy, 0.0, x, psi0, step)?;
    let dpsi = generator(&h, energy, x) * psi;
    let l_psi = dpsi - seed.kernel_at(x) * psi;
    let k = kappa(energy, &p);
    let wx = if x > 0.0 { w.w_plus } else { w.w_minus };
    let mu = k * x.signum() - I * p.a.re;
    let id = Mat::<2>::identity();
    let norm = psi.norm();
    Ok(AsymptoticActionCheck {
        x,
        plus_form: (l_psi - (id * k + wx) * psi).norm() / norm,
        minus_form: (l_psi - (id * mu - wx) * psi).norm() / norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::darboux2::{bound_states, build_seed, missing_state, transform};
    use crate::field::MatrixField;
    use crate::free::{gamma2, FreeParams};
    use crate::numerics::c;
    use crate::reduce::build_distortion_model;
    use nalgebra::Vector2;
    use proptest::prelude::*;

    fn fig1() -> Seed2x2 {
        build_seed(FreeParams::new(-2.0, 5.0, c(0.0, 0.0)), -1.0, 2.0, 0.0, 0.0).unwrap()
    }

    fn free_zero() -> DiracOperator<2> {
        DiracOperator::new(gamma2(), MatrixField::constant(Mat::<2>::zeros()).with_asymptotics(Mat::<2>::zeros(), Mat::<2>::zeros()))
            .unwrap()
    }

    #[test]
    fn free_propagation_is_a_phase() {
        let h = free_zero();
        let ch = channels(&h.gamma(), &Mat::<2>::zeros(), 1.3).unwrap();
        let u = ch.right_movers[0].spinor;
        let k = ch.right_movers[0].momentum();
        assert!((k - 1.3).abs() < 1e-12);
        let out = propagate(&h, 1.3, -2.0, 3.0, u, 1e-3).unwrap();
        assert!(max_abs(&(out - u * C64::new(0.0, 5.0 * k).exp())) < 1e-8);
    }

    #[test]
    fn propagation_is_linear() {
        let h = transform(&fig1()).unwrap().operator();
        let (p, q) = (Vector2::new(c(1.0, 0.2), c(-0.3, 0.5)), Vector2::new(c(0.1, -1.0), c(0.7, 0.0)));
        let (a, b) = (c(0.3, -1.1), c(2.0, 0.4));
        let lhs = propagate(&h, 6.0, -3.0, 3.0, p * a + q * b, 1e-3).unwrap();
        let rhs = propagate(&h, 6.0, -3.0, 3.0, p, 1e-3).unwrap() * a + propagate(&h, 6.0, -3.0, 3.0, q, 1e-3).unwrap() * b;
        assert!(max_abs(&(lhs - rhs)) < 1e-10);
    }

    #[test]
    fn slowly_decaying_bound_state_propagates_to_its_closed_form() {
        let s = build_seed(FreeParams::new(-2.0, 5.0, c(0.0, 0.0)), -1.995, 4.99, 0.0, 0.0).unwrap();
        assert!(s.kappa1 < 0.2);
        let t = transform(&s).unwrap();
        let st = missing_state(&s, 1);
        let out = propagate(&t.operator(), s.eps1, -20.0, 20.0, st.at(-20.0), 1e-3).unwrap();
        let exact = st.at(20.0);
        assert!((out - exact).norm() < 1e-6 * exact.norm());
    }

    #[test]
    fn channels_are_exact_eigenvectors() {
        let v = FreeParams::new(-2.0, 5.0, c(0.7, 0.4)).matrix();
        let a = crate::numerics::invert(&gamma2()).unwrap() * (Mat::<2>::identity() * c(7.0, 0.0) - v);
        let ch = channels(&gamma2(), &v, 7.0).unwrap();
        assert_eq!((ch.right_movers.len(), ch.left_movers.len()), (1, 1));
        for c in ch.right_movers.iter().chain(ch.left_movers.iter()) {
            assert!((a * c.spinor - c.spinor * c.mu).norm() < 1e-12);
            let vel = (c.spinor.adjoint() * gamma2() * I * c.spinor)[(0, 0)].re;
            assert!((vel.abs() - 1.0).abs() < 1e-12);
        }
        assert!(ch.right_movers[0].momentum() != ch.left_movers[0].momentum());
    }

    #[test]
    fn free_operator_is_reflectionless_exactly() {
        let h = free_zero();
        for e in [-3.0, 0.5, 4.0] {
            let r = reflection_transmission(&h, e).unwrap();
            assert!(r.r.norm() < 1e-12 && (r.t - 1.0).norm() < 1e-9, "{:?}", r);
        }
    }

    #[test]
    fn fig1_is_reflectionless() {
        let h = transform(&fig1()).unwrap().operator();
        for e in [6.0, 7.0, 10.0, -3.0] {
            let r = reflection_transmission(&h, e).unwrap();
            assert!(r.r.norm() < 1e-6, "E={e} R={}", r.r);
            assert!((r.t.norm() - 1.0).abs() < 1e-6);
            assert!(r.flux_defect < 1e-6);
        }
        assert!(matches!(reflection_transmission(&h, 0.5), Err(Error::NotScatteringEnergy { .. })));
    }

    #[test]
    fn barrier_reflects_and_conserves_flux() {
        let v = MatrixField::new(|x: f64| crate::pauli::sigma3() * c(0.8 / x.cosh().powi(2), 0.0))
            .with_asymptotics(Mat::<2>::zeros(), Mat::<2>::zeros());
        let h = DiracOperator::new(gamma2(), v).unwrap();
        let r = reflection_transmission(&h, 0.9).unwrap();
        assert!(r.r.norm() > 1e-3);
        assert!(r.flux_defect < 1e-6);
    }

    #[test]
    fn one_sided_energies_are_rejected() {
        let mass = crate::pauli::sigma3();
        let v = MatrixField::new(move |x: f64| mass + Mat::<2>::identity() * c(2.0 * (1.0 + x.tanh()), 0.0))
            .with_asymptotics(mass, mass + Mat::<2>::identity() * c(4.0, 0.0));
        let h = DiracOperator::new(gamma2(), v).unwrap();
        assert!(matches!(reflection_transmission(&h, 4.0), Err(Error::OneSidedScattering { .. })));
        assert!(matches!(reflection_transmission(&h, 0.5), Err(Error::OneSidedScattering { .. })));
        let r = reflection_transmission(&h, 7.0).unwrap();
        assert!(r.flux_defect < 1e-6 && r.r.norm() > 1e-6, "{} {}", r.flux_defect, r.r.norm());
    }

    #[test]
    fn fig3_is_reflectionless() {
        let s1 = build_seed(FreeParams::new(3.0, -2.0, c(0.0, 1.0)), 1.25, 0.25, 1.0, -1.0).unwrap();
        let s2 = build_seed(FreeParams::new(2.5, -1.5, c(1.0, 0.0)), 0.75, -0.5, 0.0, 0.0).unwrap();
        let m = build_distortion_model(&s1, &s2, 0.0).unwrap();
        let r = reflection_transmission(&m.operator, 5.0).unwrap();
        assert_eq!(r.reflection.shape(), (2, 2));
        assert!(r.max_reflection() < 1e-6, "{}", r.max_reflection());
        assert!(r.flux_defect < 1e-6);
    }

    #[test]
    fn step_halving_is_fourth_order() {
        let h = transform(&fig1()).unwrap().operator();
        let rs: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&s| reflection_transmission_with(&h, 7.0, &ScatterOptions { step: s, ..Default::default() }).unwrap().r.norm())
            .collect();
        let ratio = rs[1] / rs[2];
        assert!(ratio > 10.0 && ratio < 24.0, "{rs:?}");
    }

    #[test]
    fn bound_state_check_examples() {
        let t = transform(&fig1()).unwrap();
        let grid = Grid::default();
        for s in bound_states(&t).unwrap() {
            let c = bound_state_check(&t.operator(), s.energy, &s.spinor, &grid);
            assert!(c.residual < 1e-8 && c.finite_norm);
        }
        let p = FreeParams::new(-2.0, 5.0, c(0.0, 0.0));
        let psi = fundamental_psi(0.5, &p, c(0.0, 0.0)).unwrap();
        let g = Grid::new(-5.0, 5.0, 1001).unwrap();
        let chk = bound_state_check(&p.operator(), 0.5, &psi, &g);
        assert!(!chk.finite_norm && chk.norm.is_infinite());
        let zero = bound_state_check(&p.operator(), 0.5, &SpinorField::zero(), &grid);
        assert_eq!((zero.residual, zero.norm), (0.0, 0.0));
    }

    #[test]
    fn asymptotic_action_sign() {
        let a = asymptotic_action(&fig1(), 0.5, 15.0, 1e-3).unwrap();
        assert!(a.minus_form < 1e-5, "{a:?}");
        assert!(a.plus_form > 1.0);
        let b = asymptotic_action(&fig1(), 0.5, -15.0, 1e-3).unwrap();
        assert!(b.minus_form < 1e-5, "{b:?}");
    }

    #[test]
    fn deep_gap_growth_is_renormalized() {
        let h = free_zero();
        let p = propagate_columns(&h, 0.0, 0.0, 1.0, Mat::<2>::identity(), 1e-3).unwrap();
        assert_eq!(p.log_scale, 0.0);
        let v = MatrixField::constant(crate::pauli::sigma3() * c(400.0, 0.0));
        let h = DiracOperator::new(gamma2(), v).unwrap();
        let p = propagate_columns(&h, 0.0, 0.0, 2.0, Mat::<2>::identity(), 1e-4).unwrap();
        assert!(p.log_scale > 300.0 && max_abs(&p.value).is_finite());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn flux_is_conserved_for_transformed_models(f1 in 0.1..0.9f64, f2 in 0.1..0.9f64, e_off in 0.5..5.0f64, above in any::<bool>()) {
            let p = FreeParams::new(-1.0, 1.5, c(0.3, 0.2));
            let band = crate::free::band_edges(&p);
            let e1 = band.eps_minus + f1 * (band.eps_plus - band.eps_minus);
            let e2 = band.eps_minus + f2 * (band.eps_plus - band.eps_minus);
            if let Ok(s) = build_seed(p, e1.min(e2), e1.max(e2), 0.0, 0.0) {
                if let Ok(t) = transform(&s) {
                    let e = if above { band.eps_plus + e_off } else { band.eps_minus - e_off };
                    let r = reflection_transmission(&t.operator(), e).unwrap();
                    prop_assert!(r.flux_defect < 1e-6);
                    prop_assert!(r.r.norm() < 1e-6);
                }
            }
        }
    }
}
