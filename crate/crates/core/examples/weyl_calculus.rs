//! Weyl quantization on the torus: the magnetic symbol reproduces the
//! assembled operator, and commutators with Fourier multipliers are exact.

use magobs::linalg;
use magobs::spectral::assemble;
use magobs::weyl::{commutator, quantize, Symbol, ZetaPoly};
use magobs::{FourierField2D, Mode, ModeBasis, VectorPotential, C64};

fn main() -> magobs::Result<()> {
    let a = VectorPotential::new(FourierField2D::cos(Mode::new(0, 1), 1.0), FourierField2D::sin(Mode::new(1, 0), 0.4))?;
    let v = FourierField2D::cos(Mode::new(1, 1), 0.2);
    let basis = ModeBasis::square(8);
    let h = 0.1;
    let op = quantize(&Symbol::magnetic(&a, &v, h), h, &basis)?;
    let direct = assemble(&a, &v, &basis)?.entries.mapv(|z| z * (h * h));
    println!("|Op(p) - h^2 H| = {:.2e}", linalg::max_abs(&(&op - &direct)));

    let sym = Symbol::product(&FourierField2D::cos(Mode::new(1, 2), 1.0), &ZetaPoly::new(&[(0, 0, 1.0), (1, 1, 0.5)]));
    for p in [ZetaPoly::xi_sq(), ZetaPoly::zeta_sq(), ZetaPoly::xi()] {
        let op_a = quantize(&sym, h, &basis)?;
        let op_p = quantize(&Symbol::polynomial(&p), h, &basis)?;
        let lhs = commutator(&op_a, &op_p)?;
        let rhs = quantize(&sym.transport(&p), h, &basis)?.mapv(|z| z * C64::new(0.0, h));
        println!("[Op(a), Op(P)] + (h/i) Op(transport): {:.2e}", linalg::max_abs(&(&lhs - &rhs)));
    }
    Ok(())
}
