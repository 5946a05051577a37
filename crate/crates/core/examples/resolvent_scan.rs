//! Resolvent constants `C(λ)` over `λ ∈ [−400, 400]` at two truncations.

use std::f64::consts::PI;

use magobs::obs::{region_mass_matrix, resolvent_scan};
use magobs::spectral::{assemble, eigendecompose};
use magobs::{FourierField2D, Mode, ModeBasis, Region, VectorPotential};

fn main() -> magobs::Result<()> {
    let a = VectorPotential::new(FourierField2D::cos(Mode::new(0, 1), 1.0), FourierField2D::zero())?;
    let region = Region::horizontal_strips(&[(-0.5, 0.5), (PI - 0.5, PI + 0.5)])?;
    let lambdas: Vec<f64> = (0..=80).map(|i| -400.0 + 10.0 * i as f64).collect();
    for n in [12, 16] {
        let basis = ModeBasis::square(n);
        let eig = eigendecompose(&assemble(&a, &FourierField2D::zero(), &basis)?)?;
        let scan = resolvent_scan(&eig, &region_mass_matrix(&region, &basis), &lambdas)?;
        println!(
            "N = {n}: max C {:.4}, max on [-144, 400] {:.4}, C(0) {:.4}",
            scan.max(),
            scan.max_in(-144.0, 400.0),
            scan.constants[40]
        );
    }
    Ok(())
}
