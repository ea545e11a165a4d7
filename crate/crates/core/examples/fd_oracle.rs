//! Finite differences on a square around the gap, with boundary values from
//! the series representation, compared with the representation inside.

use gapfield::experiments::equivalence::{representation_vs_fd, EquivalenceSetup};
use gapfield::quadrature::Quadrature;

fn main() -> gapfield::error::Result<()> {
    let mut setup = EquivalenceSetup::new(0.2, 0.1, 10.0);
    setup.quadrature = Quadrature { tol: 1e-4, ..Quadrature::new(16, 16) };
    let r = representation_vs_fd(&setup)?;
    println!("grids h = {} and {}", r.h_coarse, r.h_fine);
    println!("fitted constant      {:.3e}", r.constant);
    println!("max deviation        {:.3e}", r.max_deviation);
    println!("|u_h - u_2h| at probes {:.3e}", r.convergence_estimate);
    println!("within {}x: {}", setup.margin, r.passed);
    Ok(())
}
