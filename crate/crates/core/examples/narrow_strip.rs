//! Exponential decay of the gradient in a thin parabolic gap with an
//! insulated top and a grounded bottom.

use gapfield::fd::{caccioppoli_check, decay_fit, solve_strip, StripData, StripDomain, StripGrid};

fn main() -> gapfield::error::Result<()> {
    for eps in [1e-2, 4e-3, 1e-3] {
        let d = StripDomain::parabolic(eps)?;
        let sol = solve_strip(&d, StripGrid::default(), StripData::grounded_odd())?;
        let fit = decay_fit(&sol, 0.1, 0.5);
        let cac = caccioppoli_check(&sol, &[0.4, 0.3, 0.2, 0.15]);
        println!(
            "eps = {eps:<6} slope = {:>8.4}  R² = {:.4}  C0 in [{:.2e}, {:.2e}]",
            fit.slope, fit.r_squared, cac.c0_min, cac.c0_max
        );
        for (r, ratio) in &cac.energy_ratios {
            println!("    r = {r:<5} energy ratio {ratio:.3e}");
        }
    }
    Ok(())
}
