//! Observability constant `C_obs = 1/λ_min(G)` on the full torus and on a
//! union of strips, for the whole truncated space.

use std::f64::consts::PI;

use magobs::linalg::CMat;
use magobs::obs::{gramian, observability_constant, region_mass_matrix, MassMatrix};
use magobs::spectral::{assemble, eigendecompose};
use magobs::{FourierField2D, Mode, ModeBasis, Region, VectorPotential};

fn main() -> magobs::Result<()> {
    let a = VectorPotential::new(FourierField2D::cos(Mode::new(0, 1), 1.0), FourierField2D::zero())?;
    let basis = ModeBasis::square(8);
    let eig = eigendecompose(&assemble(&a, &FourierField2D::zero(), &basis)?)?;
    let all = CMat::eye(basis.len());
    let t = 2.0;
    let full = observability_constant(&gramian(&eig, &MassMatrix::identity(basis), t)?, &all, t, "full torus")?;
    println!("full torus: lambda_min {:.6}, C_obs {:.6}", full.lambda_min, full.c_obs);
    let strips = Region::horizontal_strips(&[(-0.5, 0.5), (PI - 0.5, PI + 0.5)])?;
    let g = gramian(&eig, &region_mass_matrix(&strips, &basis), t)?;
    let r = observability_constant(&g, &all, t, "two strips")?;
    println!("two strips: lambda_min {:.6e}, C_obs {:.4}", r.lambda_min, r.c_obs);
    Ok(())
}
