//! Free 2x2 operator: band edges, closed-form solutions and a plane wave.

use dirac_darboux::free::{analytic_residual, band_edges, fundamental_solutions, kappa, scattering_state, FreeParams};
use dirac_darboux::numerics::c;

fn main() {
    let p = FreeParams::new(-2.0, 5.0, c(0.0, 0.0));
    let band = band_edges(&p);
    println!("band: ({}, {})", band.eps_minus, band.eps_plus);

    for e in [-1.0, 2.0] {
        let sol = fundamental_solutions(e, &p, c(0.0, 0.0)).unwrap();
        let rel = |x: f64| analytic_residual(&p, e, &sol.psi, x) / sol.psi.at(x).norm();
        let r = (-50..=50).map(|i| rel(0.1 * i as f64)).fold(0.0, f64::max);
        println!("E = {e:>4}: kappa = {:.6}, relative residual on [-5, 5] = {r:.2e}", kappa(e, &p).re);
    }

    let wave = scattering_state(7.0, &p, 1).unwrap();
    println!("plane wave at E = 7: k = {:.6}, u = ({:.4}, {:.4})", wave.k, wave.u[0], wave.u[1]);
}
