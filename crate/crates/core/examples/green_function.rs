//! The Green's function of the two-inclusion conductivity problem: values,
//! derivatives and the transmission conditions on both circles.

use gapfield::geometry::Geometry;
use gapfield::green::{d_green, green, interface_check, Conductivity, GreenParams};
use num_complex::Complex64 as C;

fn main() -> gapfield::error::Result<()> {
    let g = Geometry::unit(0.01)?;
    let c = Conductivity::new(0.1, 10.0)?;
    let p = GreenParams::default();
    println!("k1 = {}, k2 = {}, gamma = {:.4}", c.k1, c.k2, c.gamma);

    let y = C::new(0.3, 0.9);
    for x in [C::new(0.0, 0.0), C::new(0.0, 0.002), g.c1, g.c2 + C::new(0.2, 0.1), C::new(-2.5, 1.0)] {
        let v = green(x, y, &c, &g, &p)?;
        let d1 = d_green(x, y, &c, &g, &p, (1, 0))?;
        let d2 = d_green(x, y, &c, &g, &p, (0, 1))?;
        println!(
            "x = {:>16}: G = {:>12.6e}  grad = ({:>11.4e}, {:>11.4e})  terms = {}",
            format!("{x:.3}"),
            v.value,
            d1.value,
            d2.value,
            v.k_used
        );
    }

    let rep = interface_check(y, &c, &g, &p, 64, 1e-4)?;
    println!("over {} interface points: value jump {:.2e}, flux jump {:.2e}", rep.points, rep.value_jump, rep.flux_jump);
    Ok(())
}
