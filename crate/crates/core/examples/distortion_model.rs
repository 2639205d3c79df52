//! 4x4 intervalley-distortion model assembled from two 2x2 transformations.

use dirac_darboux::darboux2::build_seed;
use dirac_darboux::dirac::{hermiticity_defect, intertwining_residual, RESIDUAL_STEP};
use dirac_darboux::free::FreeParams;
use dirac_darboux::numerics::{c, Grid};
use dirac_darboux::reduce::build_distortion_model;

fn main() {
    let s1 = build_seed(FreeParams::new(3.0, -2.0, c(0.0, 1.0)), 1.25, 0.25, 1.0, -1.0).unwrap();
    let s2 = build_seed(FreeParams::new(2.5, -1.5, c(1.0, 0.0)), 0.75, -0.5, 0.0, 0.0).unwrap();
    let model = build_distortion_model(&s1, &s2, 0.0).unwrap();
    let grid = Grid::default();

    println!("hermiticity defect: {:.2e}", hermiticity_defect(model.operator.potential(), &grid));
    println!("engine discrepancy: {:.2e}", model.oracle_discrepancy);
    let pair = model.darboux_pair();
    println!("intertwining residual: {:.2e}", intertwining_residual(&model.original, &model.operator, &pair, &[], &grid, RESIDUAL_STEP));

    for x in [-2.0, 0.0, 2.0] {
        let d = model.components_at(x);
        println!("x = {x:>4}: V_A = {:.5}, V_B = {:.5}, W_A = {:.5}, Im W+ = {:.5}, Im V = {:.5}", d.v_a, d.v_b, d.w_a, d.w_plus.im, d.v.im);
    }
    for s in &model.bound_states {
        println!("E = {:>5}: residual {:.2e}", s.energy, s.residual);
    }
}
