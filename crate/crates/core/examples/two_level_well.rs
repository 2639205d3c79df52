//! Closed-form 2x2 transformation with two bound states.
//!
//! Prints the transformed components on a coarse grid together with the
//! regularity condition and the bound-state densities.

use dirac_darboux::darboux2::{bound_states, build_seed, regularity, transform};
use dirac_darboux::free::FreeParams;
use dirac_darboux::numerics::c;

fn main() {
    let seed = build_seed(FreeParams::new(-2.0, 5.0, c(0.0, 0.0)), -1.0, 2.0, 0.0, 0.0).unwrap();
    let reg = regularity(&seed);
    println!(
        "regularity: {:.4} > {:.4} ({}), min|D| = {:.4}",
        reg.condition_lhs, reg.condition_rhs, reg.sufficient_condition_holds, reg.min_abs_d
    );

    let t = transform(&seed).unwrap();
    let states = bound_states(&t).unwrap();
    println!("{:>6} {:>10} {:>10} {:>10} {:>10} {:>10}", "x", "v~", "w~", "Im a~*", "P_eps1", "P_eps2");
    for i in 0..=12 {
        let x = -3.0 + 0.5 * i as f64;
        println!(
            "{x:>6.2} {:>10.5} {:>10.5} {:>10.5} {:>10.5} {:>10.5}",
            t.v_t(x),
            t.w_t(x),
            t.a_t(x).conj().im,
            states[0].density(x),
            states[1].density(x)
        );
    }
}
