//! Chiral (diagonal-mass) transformation `ω̃₃ = ω₃ + 2 Re(ξᵀσ₂ξ′/ξᵀξ)` and its
//! two missing states at `±ε`.

use dirac_darboux::darboux2::chiral_transform;
use dirac_darboux::free::{fundamental_psi, FreeParams};
use dirac_darboux::numerics::{c, Grid};

fn main() {
    let (m, e) = (1.0, 0.6);
    let xi = fundamental_psi(e, &FreeParams::new(m, -m, c(0.0, 0.0)), c(0.0, 0.0)).unwrap();
    let ct = chiral_transform(move |_| m, xi, e).unwrap();
    for x in [0.0, 0.5, 1.0, 2.0, 4.0] {
        println!("omega~({x}) = {:.12}", ct.omega_t(x));
    }
    let states = ct.bound_states(&Grid::default()).unwrap();
    for s in &states.states {
        println!("E = {:>5}: norm {:.6}, residual {:.2e}", s.energy, s.norm, s.residual);
    }
}
