//! Composed circle inversions and their closed form.
//!
//! Iterating the two reflections drives every point toward a fixed point
//! inside one of the disks. The closed form evaluates the k-th iterate and its
//! derivatives in constant time.

use gapfield::geometry::{d_psi_pow, fixed_points, psi_iterate, psi_pow, Frame, Geometry};
use num_complex::Complex64 as C;

fn main() -> gapfield::error::Result<()> {
    let g = Geometry::unit(0.01)?;
    let fp = fixed_points(&g);
    println!("eps = {}: fixed points {:.6} and {:.6}", g.eps, fp.lambda1, fp.lambda2);

    let x = C::new(0.3, 0.8);
    println!("{:>4} {:>28} {:>12}", "k", "iterate", "|closed - it|");
    for k in [1, 2, 5, 10, 20, 50] {
        let it = psi_iterate(x, k, &g)?;
        let closed = psi_pow(x, k, &g, Frame::Original)?;
        println!("{k:>4} {:>28} {:>12.2e}", format!("{it:.10}"), (it - closed).norm());
    }

    for order in 1..=3 {
        let d = d_psi_pow(x, 10, order, &g)?;
        println!("d^{order}/dz^{order} of the 10th iterate: {d:.6e}");
    }
    Ok(())
}
