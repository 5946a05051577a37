//! Quasimode witness for `A = (cos y, 0)`: the fraction of time-integrated
//! mass seen by `ω = T_x × (1.2, 2.0)` decays as the x-frequency grows.

use magobs::quasimode::{witness_experiment, write_witness_csv, WitnessSetup};
use magobs::{FourierField2D, Mode, Region, VectorPotential};

fn main() -> magobs::Result<()> {
    let a = VectorPotential::new(FourierField2D::cos(Mode::new(0, 1), 1.0), FourierField2D::zero())?;
    let v = FourierField2D::zero();
    let region = Region::horizontal_strips(&[(1.2, 2.0)])?;
    let setup =
        WitnessSetup { a: &a, v: &v, region: &region, y_star: 0.0, b: 1.0, t: 1.0, m: 48, grid: 1024, samples: 16 };
    let records = witness_experiment(&setup, &[5, 8, 12, 16, 20])?;
    println!("{:>4} {:>8} {:>12} {:>10} {:>10}", "k", "hbar", "ratio", "trunc", "exterior");
    for r in &records {
        println!(
            "{:>4} {:>8.4} {:>12.5e} {:>10.1e} {:>10.2e}",
            r.k, r.hbar, r.mass_ratio, r.truncation_loss, r.exterior_fraction
        );
    }
    write_witness_csv(&records, std::io::stdout())?;
    Ok(())
}
