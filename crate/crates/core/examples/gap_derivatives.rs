//! Derivatives of the field near the gap centre as the inclusions approach.
//!
//! With one inclusion insulating and the other conducting the derivatives
//! stay bounded; with two perfectly conducting-like inclusions |Du| grows.

use gapfield::geometry::Geometry;
use gapfield::green::{Conductivity, GreenParams};
use gapfield::potential::{u_rep_jet, SourceData};
use gapfield::quadrature::Quadrature;
use num_complex::Complex64 as C;

fn main() -> gapfield::error::Result<()> {
    let s = SourceData::gaussian_dipole(C::new(1.05, 1.6), 0.06)?;
    let p = GreenParams { tol: 1e-10, ..GreenParams::default() };
    let q = Quadrature::new(32, 32);
    for (k1, k2) in [(0.1, 10.0), (100.0, 100.0)] {
        let c = Conductivity::new(k1, k2)?;
        println!("k1 = {k1}, k2 = {k2}");
        for eps in [1e-1, 1e-2, 1e-3] {
            let g = Geometry::unit(eps)?;
            let mut line = format!("  eps = {eps:<6}");
            for m in 1..=3 {
                let jet = u_rep_jet(C::new(0.0, 0.0), &s, &c, &g, &p, &q, m)?;
                line += &format!("  |D^{m}u| = {:<10.4e}", jet.max_abs());
            }
            println!("{line}");
        }
    }
    Ok(())
}
