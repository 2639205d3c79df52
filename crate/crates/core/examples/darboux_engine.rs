//! Generic first-order Darboux engine on an arbitrary seed matrix, checked
//! through the intertwining relation `LH = H̃L`.

use dirac_darboux::darboux2::build_seed;
use dirac_darboux::dirac::{darboux, intertwining_residual, missing_states, RESIDUAL_STEP};
use dirac_darboux::free::FreeParams;
use dirac_darboux::numerics::{c, Grid};

fn main() {
    let p = FreeParams::new(-2.0, 5.0, c(0.0, 0.0));
    let seed = build_seed(p, -1.0, 2.0, 0.0, 0.0).unwrap();
    let h = p.operator();
    let pair = darboux(&h, &seed.seed_matrix()).unwrap();

    let grid = Grid::default();
    let r = intertwining_residual(&h, &pair.transformed, &pair, &[], &grid, RESIDUAL_STEP);
    println!("intertwining residual: {r:.2e}");
    let v = pair.transformed.potential().at(0.0);
    println!("V~(0) = [[{:.6}, {:.6}], [{:.6}, {:.6}]]", v[(0, 0)], v[(0, 1)], v[(1, 0)], v[(1, 1)]);

    let missing = missing_states(&pair.seed, &pair.transformed, &grid, 0.5).unwrap();
    for s in &missing.states {
        println!("E = {:>4}: finite norm {}, residual {:.2e}", s.energy, s.finite_norm, s.residual);
    }
}
