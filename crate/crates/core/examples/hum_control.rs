//! Hilbert uniqueness control steering a low-mode state to a target from two
//! horizontal strips.

use std::f64::consts::PI;

use magobs::linalg::CVec;
use magobs::obs::{hum_control, region_mass_matrix};
use magobs::spectral::{assemble, eigendecompose};
use magobs::{FourierField2D, Mode, ModeBasis, Region, VectorPotential, C64};

fn main() -> magobs::Result<()> {
    let a = VectorPotential::new(FourierField2D::cos(Mode::new(0, 1), 1.0), FourierField2D::zero())?;
    let basis = ModeBasis::square(12);
    let eig = eigendecompose(&assemble(&a, &FourierField2D::zero(), &basis)?)?;
    let region = Region::horizontal_strips(&[(-0.5, 0.5), (PI - 0.5, PI + 0.5)])?;
    let mass = region_mass_matrix(&region, &basis);

    let mut psi0 = CVec::zeros(basis.len());
    let mut psi1 = CVec::zeros(basis.len());
    psi0[basis.index(Mode::new(0, 0)).unwrap()] = C64::new(1.0, 0.0);
    psi0[basis.index(Mode::new(1, -1)).unwrap()] = C64::new(0.5, 0.0);
    psi1[basis.index(Mode::new(1, 1)).unwrap()] = C64::new(1.0, 0.5);
    for reg in [1e-4, 1e-7, 1e-10] {
        let r = hum_control(&eig, &mass, 1.0, &psi0, &psi1, reg, 11)?;
        println!(
            "reg {reg:.0e}: error {:.3e} (relative {:.3e}), lambda_min(G') {:.3e}",
            r.error, r.relative_error, r.gramian_min
        );
    }
    Ok(())
}
