//! Damped evolution `i∂ψ = (H − ia)ψ`: spectral abscissa and norm decay.

use magobs::linalg::{self, CVec};
use magobs::spectral::{assemble, damped_norm_trace, damped_operator, spectral_abscissa};
use magobs::{FourierField2D, Mode, ModeBasis, VectorPotential, C64};

fn main() -> magobs::Result<()> {
    let a = VectorPotential::new(FourierField2D::cos(Mode::new(0, 1), 1.0), FourierField2D::zero())?;
    let basis = ModeBasis::square(8);
    let h = assemble(&a, &FourierField2D::zero(), &basis)?;
    let constant = spectral_abscissa(&damped_operator(&h, &FourierField2D::constant(0.5))?)?;
    println!("constant damping 0.5: abscissa {constant:.12}");

    let damping = FourierField2D::constant(0.5).add(&FourierField2D::cos(Mode::new(0, 1), 0.5));
    let m = damped_operator(&h, &damping)?;
    let alpha = spectral_abscissa(&m)?;
    println!("damping 0.5 + 0.5 cos y: abscissa {alpha:.6}");
    let psi = CVec::from_shape_fn(basis.len(), |i| C64::new(1.0 / (1.0 + i as f64), 0.0));
    let psi = psi.mapv(|z| z / linalg::vec_norm(&psi));
    for (t, n) in damped_norm_trace(&m, &psi, 2.0, 10)? {
        println!("t = {t:>4.1}  |psi| = {n:.6e}  e^(-alpha t) = {:.6e}", (-alpha * t).exp());
    }
    Ok(())
}
