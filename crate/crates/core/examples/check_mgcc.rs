//! Magnetic geometric control check for `A = (cos y, 0)` on three regions,
//! with the plain GCC verdict and the optimality witness for comparison.

use std::f64::consts::{PI, TAU};

use magobs::geometry::{gcc_check, mgcc_check, optimality_witness, BOUNDARY_TOL};
use magobs::{FourierField2D, Mode, Region, VectorPotential};

fn main() -> magobs::Result<()> {
    let a = VectorPotential::new(FourierField2D::cos(Mode::new(0, 1), 1.0), FourierField2D::zero())?;
    let regions = [
        ("T_x x (1, 2)", Region::horizontal_strips(&[(1.0, 2.0)])?),
        ("two strips", Region::horizontal_strips(&[(-0.5, 0.5), (PI - 0.5, PI + 0.5)])?),
        ("thin strip + square", Region::new(vec![[0.0, TAU, -0.2, 0.2], [1.0, 2.0, PI - 0.5, PI + 0.5]])?),
    ];
    for (name, region) in &regions {
        let report = mgcc_check(&a, region, 1e-8, false)?;
        let gcc = gcc_check(region);
        println!("{name}: MGCC {} (cutoff {}), GCC holds: {}", report.overall, report.cutoff, gcc.holds);
        for r in report.offending().take(3) {
            println!("  offending {} with {} critical point(s), verdict {}", r.direction, r.n_crit(), r.verdict);
        }
        println!("  witness: {:?}", optimality_witness(&a, region, BOUNDARY_TOL)?);
    }
    Ok(())
}
