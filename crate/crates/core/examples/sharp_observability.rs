//! Scaled observability on spectral windows `|h²λ − 1| ≤ ρ` with
//! `T_eff = T√h`: stable rates under the magnetic condition, collapsing
//! rates when it fails.

use std::f64::consts::PI;

use magobs::obs::{region_mass_matrix, sharp_obs_with, write_obs_csv, SharpObsSetup};
use magobs::spectral::{assemble, eigendecompose};
use magobs::{FourierField2D, Mode, ModeBasis, Region, VectorPotential};

fn main() -> magobs::Result<()> {
    let a = VectorPotential::new(FourierField2D::cos(Mode::new(0, 1), 1.0), FourierField2D::zero())?;
    let v = FourierField2D::zero();
    let basis = ModeBasis::square(20);
    let eig = eigendecompose(&assemble(&a, &v, &basis)?)?;
    let hs = [1.0 / 8.0, 1.0 / 12.0, 1.0 / 16.0];
    let geometries = [
        ("two strips", Region::horizontal_strips(&[(-0.5, 0.5), (PI - 0.5, PI + 0.5)])?),
        ("T_x x (1.2, 2.0)", Region::horizontal_strips(&[(1.2, 2.0)])?),
    ];
    for (name, region) in &geometries {
        let setup = SharpObsSetup { a: &a, v: &v, region, basis, t: 1.0, rho: 0.3, geometry: name };
        let scan = sharp_obs_with(&eig, &region_mass_matrix(region, &basis), &setup, &hs)?;
        println!("{name}");
        for r in &scan.reports {
            println!("  h = {:.4}  dim {:>3}  rate {:.4e}", r.h.unwrap_or(0.0), r.dim, r.rate());
        }
        write_obs_csv(&scan.reports, std::io::stdout())?;
    }
    Ok(())
}
