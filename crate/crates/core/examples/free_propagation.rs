//! Spectral propagation: eigenvalues of `H_{A,V}` and a norm/energy trace.

use magobs::spectral::{assemble, eigendecompose, propagate};
use magobs::{FourierField2D, Mode, ModeBasis, ModeVector, VectorPotential, C64};

fn main() -> magobs::Result<()> {
    let a = VectorPotential::new(FourierField2D::cos(Mode::new(0, 1), 0.5), FourierField2D::cos(Mode::new(1, 0), 0.3))?;
    let v = FourierField2D::cos(Mode::new(1, 1), 0.4);
    let basis = ModeBasis::square(10);
    let h = assemble(&a, &v, &basis)?;
    let eig = eigendecompose(&h)?;
    println!("lowest eigenvalues: {:.6?}", &eig.values[..6]);

    let u0 =
        ModeVector::from_fn(
            basis,
            |k| {
                if k.linf() <= 1 {
                    C64::new(1.0, 0.1 * k.k1 as f64)
                } else {
                    C64::new(0.0, 0.0)
                }
            },
        )
        .normalized();
    for j in 0..=5 {
        let t = 0.4 * j as f64;
        let u = propagate(&eig, &u0, t)?;
        let e = u.inner(&h.apply(&u)?)?.re;
        println!("t = {t:.1}  |u| = {:.14}  <Hu, u> = {e:.12}", u.norm());
    }
    Ok(())
}
