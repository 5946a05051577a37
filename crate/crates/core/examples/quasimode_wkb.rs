//! WKB quasimode at the maximum of `A₁ = cos y` with `A₂ = 0.3 + 0.2 sin y`:
//! Hermite coefficients, residual order and localisation.

use magobs::quasimode::{build_wkb, extract_params, residual_scan, RESIDUAL_GRID};
use magobs::CircleFunction;

fn main() -> magobs::Result<()> {
    let tau = std::f64::consts::TAU;
    let a1 = CircleFunction::from_trig(tau, 0.0, &[(1, 1.0)], &[]);
    let a2 = CircleFunction::from_trig(tau, 0.3, &[], &[(1, 0.2)]);
    let w = a1.mul(&a1)?.add(&a2.mul(&a2)?)?;
    let params = extract_params(&a1, &a2, &w, 0.0, 1.0)?;
    println!("beta = {}, r3 = {:.3e}, r4 = {:.6}", params.beta, params.a1_taylor[3], params.a1_taylor[4]);

    let sol = build_wkb(&params, 0.1)?;
    println!("c0 = {:.12}, Lambda0 = {:.12}", sol.c0, sol.lambda0);
    for (j, b) in sol.beta1.iter().enumerate() {
        println!("beta1_{} = {:.6}", j + 1, b);
    }
    for (j, b) in sol.beta2.iter().enumerate() {
        println!("beta2_{} = {:.6}", j + 1, b);
    }

    let scan = residual_scan(&params, &[0.2, 0.14, 0.1, 0.07, 0.05], RESIDUAL_GRID)?;
    println!("{:>6} {:>12} {:>12} {:>8} {:>8}", "hbar", "residual", "exterior", "norm", "loc");
    for r in &scan.records {
        println!(
            "{:>6} {:>12.4e} {:>12.4e} {:>8.5} {:>8.4}",
            r.hbar, r.residual_l2, r.exterior_mass, r.norm, r.localization
        );
    }
    println!("slope {:.3} (expected 2.5), Lambda0 spread {:.1e}", scan.slope, scan.lambda0_spread);
    Ok(())
}
