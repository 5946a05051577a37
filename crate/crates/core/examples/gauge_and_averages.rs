//! Directional averages, `A_γ`, the averaged magnetic field and the first
//! gauge transform for a random potential.

use magobs::fields::{a_gamma, apply_gauge, b_gamma_average, directional_average, gauge_g1};
use magobs::{Direction, Mode, ModeBasis, ModeVector, VectorPotential};
use rand::SeedableRng;

fn main() -> magobs::Result<()> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(3);
    let a = VectorPotential::random(2, 0.5, &mut rng);
    for (p, q) in [(1, 0), (0, 1), (1, 1), (2, -1)] {
        let d = Direction::new(p, q)?;
        let ag = a_gamma(&a, d);
        let b = b_gamma_average(&a, d);
        let err = (0..64)
            .map(|j| d.circumference() * j as f64 / 64.0)
            .map(|s| (b.eval(s) + ag.derivative().eval(s)).norm())
            .fold(0.0, f64::max);
        println!("{d}: |A_γ| modes {}, <B>_γ = -A_γ' to {err:.1e}", ag.max_mode());
    }

    let avg = directional_average(&a.a1, Direction::new(1, 0)?);
    println!("x-average of A1 keeps {} modes", avg.iter().count());
    let g = gauge_g1(&a);
    let gauged = a.add_gradient(&g);
    println!("A1 + dg/dx is x-independent: {}", gauged.a1.is_x_independent());

    let basis = ModeBasis::square(32);
    let u = ModeVector::single(basis, Mode::new(1, 0))?;
    let v = apply_gauge(&u, &g, 1)?;
    println!("|e^(ig) u| = {:.12}", v.norm());
    Ok(())
}
