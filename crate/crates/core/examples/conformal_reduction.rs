//! Mapping two disks of different radii onto two unit disks.

use gapfield::conformal::reduce;
use gapfield::geometry::{fit_circle, Geometry};
use num_complex::Complex64 as C;

fn main() -> gapfield::error::Result<()> {
    for (eps, r1, r2) in [(0.1, 1.0, 2.0), (0.01, 5.0, 0.7), (0.05, 3.0, 3.0)] {
        let g = Geometry::new(eps, r1, r2)?;
        let red = reduce(&g)?;
        println!("r1 = {r1}, r2 = {r2}, eps = {eps}: pole {:?}, mapped gap {:.4e}", red.pole(), red.mapped.eps);
        for disk in [1u8, 2] {
            let image: Vec<C> = (0..64)
                .map(|k| g.center(disk) + g.radius(disk) * C::from_polar(1.0, std::f64::consts::TAU * k as f64 / 64.0))
                .map(|z| red.forward(z))
                .collect();
            let fit = fit_circle(&image).expect("image is a circle");
            println!("    disk {disk} -> centre {:.6}, radius {:.12}", fit.center, fit.radius);
        }
    }
    Ok(())
}
