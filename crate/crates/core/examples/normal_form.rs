//! Second averaging normal form: remainder of the conjugated operator on
//! localized packets, for `A = (cos y, 0.3 cos x)`.

use magobs::weyl::normal_form_scan;
use magobs::{FourierField2D, Mode, VectorPotential};

fn main() -> magobs::Result<()> {
    let a = VectorPotential::new(FourierField2D::cos(Mode::new(0, 1), 1.0), FourierField2D::cos(Mode::new(1, 0), 0.3))?;
    let alpha = 0.3;
    let scan = normal_form_scan(&a, alpha, &[1.0 / 32.0, 1.0 / 48.0, 1.0 / 64.0], 24)?;
    println!("{:>10} {:>14} {:>10} {:>10}", "h", "remainder", "|G2|", "edge");
    for r in &scan.records {
        println!("{:>10.5} {:>14.6e} {:>10.4} {:>10.2e}", r.h, r.remainder_norm, r.g2_norm, r.edge_mass);
    }
    println!("slope {:.3} (target ≥ {:.2})", scan.slope, 1.0 + 2.0 * alpha - 0.2);
    Ok(())
}
