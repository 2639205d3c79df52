//! Block-triangular seed: non-Hermitian partner and the missing states of its
//! adjoint.

use dirac_darboux::free::FreeParams;
use dirac_darboux::nonreducible::{adjoint_missing_states, build_block_seed, nonreducible_transform, BlockParams};
use dirac_darboux::numerics::{c, Grid};

fn main() {
    let params = BlockParams {
        params1: FreeParams::new(3.0, -2.0, c(0.0, 1.0)),
        params2: FreeParams::new(2.5, -1.5, c(1.0, 0.0)),
        eps: [1.25, 0.25, 0.75, -0.5],
        delta: [1.0, -1.0, 0.0, 0.0],
        delta_bar: [0.0, 0.0],
        coupled: true,
    };
    let grid = Grid::default();
    for coupled in [true, false] {
        let seed = build_block_seed(&BlockParams { coupled, ..params }).unwrap();
        let r = nonreducible_transform(&seed.original_operator(), &seed).unwrap();
        println!("coupled = {coupled}: hermiticity defect {:.3e}, |upper block(0)| = {:.4}", r.hermiticity_defect, r.upper_block(0.0).norm());
    }
    let seed = build_block_seed(&params).unwrap();
    let set = adjoint_missing_states(&seed, &grid).unwrap();
    for s in &set.states {
        println!("E = {:>5}: norm {:.4e}, residual {:.2e}", s.energy, s.norm, s.residual);
    }
}
