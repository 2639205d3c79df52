//! Partial transformation of a spin-orbit model with `λ = ṽ₁`, where the
//! second block is unitarily equivalent to the free massless operator.

use dirac_darboux::numerics::{c, Grid};
use dirac_darboux::reduce::{build_spinorbit_model, Lambda, SpinOrbitPotential};

fn main() {
    let model = build_spinorbit_model(1.0, 0.6, Lambda::EqualToV1Tilde).unwrap();
    println!("v1~(0) = {:.15}", model.v1_tilde(0.0));

    let grid = Grid::default();
    for e in [0.5, 1.0, 3.0] {
        let chi = model.klein_solution(e, c(1.0, 0.0), c(0.0, 1.0)).unwrap();
        println!("E = {e}: sup|(h2 - E)chi| = {:.2e}", model.h2.residual_sup(e, &chi, &grid, 1e-3));
    }
    for s in &model.bound_states {
        println!("Phi~ at E = {:>4}: residual {:.2e}", s.energy, s.residual);
    }
    let m = model.operator.potential().at(0.3);
    let p = SpinOrbitPotential::from_matrix(&m);
    println!("V = {:.6}, Delta = {:.6}, lambda = {:.6}, pattern defect {:.1e}", p.v, p.delta, p.lambda, SpinOrbitPotential::pattern_defect(&m));
}
