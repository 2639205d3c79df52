//! Limits `w± = lim UₓU⁻¹` and the action of `L` on a free solution far from
//! the well.

use dirac_darboux::darboux2::{asymptotics, build_seed};
use dirac_darboux::free::FreeParams;
use dirac_darboux::numerics::c;
use dirac_darboux::scatter::asymptotic_action;

fn main() {
    let seed = build_seed(FreeParams::new(-2.0, 5.0, c(0.0, 0.0)), -1.0, 2.0, 0.0, 0.0).unwrap();
    let w = asymptotics(&seed).unwrap();
    println!("D- = {:.6}, D+ = {:.6}", w.d_minus, w.d_plus);
    for (label, m) in [("w-", w.w_minus), ("w+", w.w_plus)] {
        println!("{label} = [[{:.6}, {:.6}], [{:.6}, {:.6}]]", m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    }
    for x in [-15.0, 15.0] {
        let a = asymptotic_action(&seed, 0.5, x, 1e-3).unwrap();
        println!("x = {x}: |L psi - (mu - w)psi|/|psi| = {:.2e}, with (kappa + w): {:.2e}", a.minus_form, a.plus_form);
    }
}
