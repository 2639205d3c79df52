//! Reflection and transmission of the 2x2 well over an energy sweep, with the
//! step-halving behaviour of `|R|` at one energy.

use dirac_darboux::darboux2::{build_seed, transform};
use dirac_darboux::free::FreeParams;
use dirac_darboux::numerics::c;
use dirac_darboux::scatter::{reflection_transmission_with, scatter_sweep, ScatterOptions};

fn main() {
    let seed = build_seed(FreeParams::new(-2.0, 5.0, c(0.0, 0.0)), -1.0, 2.0, 0.0, 0.0).unwrap();
    let h = transform(&seed).unwrap().operator();
    let energies = [-10.0, -3.0, 0.5, 6.0, 10.0];
    for (e, r) in energies.iter().zip(scatter_sweep(&h, &energies, &ScatterOptions::default())) {
        match r {
            Ok(r) => println!("E = {e:>5}: |R| = {:.2e}, |T| = {:.12}, flux defect {:.1e}", r.max_reflection(), r.transmitted_amplitude(), r.flux_defect),
            Err(err) => println!("E = {e:>5}: {err}"),
        }
    }
    for step in [0.1, 0.05, 0.025] {
        let r = reflection_transmission_with(&h, 7.0, &ScatterOptions { step, ..Default::default() }).unwrap();
        println!("step {step}: |R(7)| = {:.3e}", r.max_reflection());
    }
}
