//! Reduction of two disks with different radii to two unit disks.
//!
//! For `r1 ≠ r2` the map is `z ↦ 1/(z - z0)` with a real pole `z0` to the
//! right of both disks, chosen so the two image disks have the same radius,
//! followed by the similarity that puts the image in the normalized position
//! of [`Geometry::unit`]. For `r1 = r2` a scaling by `1/r1` suffices.

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Geometry;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MapKind {
    /// `z ↦ z / r`.
    Scaling { r: f64 },
    /// `z ↦ σ (T(z) - T(q)) / ρ` with `T(z) = 1/(z - z0)`, applied after the
    /// reflection `z ↦ -z̄` when `reflect` is set.
    Inversion { z0: f64, q: C, rho: f64, sigma: f64, reflect: bool },
}

/// A conformal (or, after a reflection, anticonformal) map taking the
/// original pair of disks onto the unit pair of `mapped`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConformalReduction {
    pub source: Geometry,
    pub mapped: Geometry,
    pub kind: MapKind,
    /// Radii of the images of the two disks under `T` alone, before
    /// normalization. Equal up to rounding.
    pub image_radii: [f64; 2],
}

fn inversion_image(z0: f64, center: f64, r: f64) -> (f64, f64) {
    // Image of |z - center| < r under 1/(z - z0), z0 real and outside.
    let d = center - z0;
    let denom = d * d - r * r;
    (d / denom, r / denom.abs())
}

/// The pole `z1` on the real axis that equalizes the image radii when `r2 > r1`.
pub fn pole_location(eps: f64, r1: f64, r2: f64) -> f64 {
    let dr = r2 - r1;
    let p = 2.0 * r1 * r2 / dr;
    let s = (r1 + r2) / dr;
    let disc = p * p + 2.0 * eps * r1 * r2 * (r1 + r2) / (dr * dr) + 0.25 * eps * eps * (s * s - 1.0);
    disc.sqrt() + 0.5 * eps * s + p
}

/// Inversion-based reduction; fails with [`Error::EqualRadii`] when the
/// radii agree.
pub fn build_reduction(g: &Geometry) -> Result<ConformalReduction> {
    if (g.r1 - g.r2).abs() <= 1e-14 * g.r1.max(g.r2) {
        return Err(Error::EqualRadii);
    }
    let reflect = g.r1 > g.r2;
    let (r1, r2) = if reflect { (g.r2, g.r1) } else { (g.r1, g.r2) };
    let eps = g.eps;
    let z0 = pole_location(eps, r1, r2);
    if z0 <= eps / 2.0 + 2.0 * r1 {
        return Err(Error::MapDegenerate(z0));
    }
    let (_, rho1) = inversion_image(z0, eps / 2.0 + r1, r1);
    let (_, rho2) = inversion_image(z0, -eps / 2.0 - r2, r2);
    let rho = 0.5 * (rho1 + rho2);
    // The gap [-ε/2, ε/2] maps onto the gap between the image disks.
    let (ta, tb) = (1.0 / (eps / 2.0 - z0), 1.0 / (-eps / 2.0 - z0));
    let gap = eps / ((z0 + eps / 2.0) * (z0 - eps / 2.0));
    let m = 0.5 * (ta + tb);
    let q = C::new(z0 + 1.0 / m, 0.0);
    // T is decreasing on the real axis left of z0, so the right disk lands on
    // the left; flip it back unless the frame was reflected first.
    let sigma = if reflect { 1.0 } else { -1.0 };
    let image_radii = if reflect { [rho2, rho1] } else { [rho1, rho2] };
    Ok(ConformalReduction {
        source: *g,
        mapped: Geometry::unit(gap / rho)?,
        kind: MapKind::Inversion { z0, q, rho, sigma, reflect },
        image_radii,
    })
}

/// Scaling reduction for equal radii.
pub fn scaling_reduction(g: &Geometry) -> Result<ConformalReduction> {
    if g.r1 != g.r2 {
        return Err(Error::InvalidGeometry(format!("scaling needs equal radii, got {} and {}", g.r1, g.r2)));
    }
    let r = g.r1;
    Ok(ConformalReduction { source: *g, mapped: Geometry::unit(g.eps / r)?, kind: MapKind::Scaling { r }, image_radii: [1.0, 1.0] })
}

/// Picks the scaling or the inversion branch.
pub fn reduce(g: &Geometry) -> Result<ConformalReduction> {
    match build_reduction(g) {
        Err(Error::EqualRadii) => scaling_reduction(g),
        other => other,
    }
}

impl ConformalReduction {
    /// Pole of the map in the original frame, if any.
    pub fn pole(&self) -> Option<C> {
        match self.kind {
            MapKind::Scaling { .. } => None,
            MapKind::Inversion { z0, reflect, .. } => Some(C::new(if reflect { -z0 } else { z0 }, 0.0)),
        }
    }

    pub fn forward(&self, z: C) -> C {
        match self.kind {
            MapKind::Scaling { r } => z / r,
            MapKind::Inversion { z0, q, rho, sigma, reflect } => {
                let z = if reflect { -z.conj() } else { z };
                let z0 = C::new(z0, 0.0);
                // T(z) - T(q) without cancellation.
                sigma / rho * (q - z) / ((z - z0) * (q - z0))
            }
        }
    }

    pub fn inverse(&self, w: C) -> C {
        match self.kind {
            MapKind::Scaling { r } => w * r,
            MapKind::Inversion { z0, q, rho, sigma, reflect } => {
                let s = w * (rho * sigma);
                let d = q - z0;
                let z = q - s * d * d / (1.0 + s * d);
                if reflect {
                    -z.conj()
                } else {
                    z
                }
            }
        }
    }

    /// `|N'(z)|` for the full normalized map `N`.
    pub fn deriv_abs(&self, z: C) -> f64 {
        match self.kind {
            MapKind::Scaling { r } => 1.0 / r,
            MapKind::Inversion { z0, rho, reflect, .. } => {
                let z = if reflect { -z.conj() } else { z };
                1.0 / (rho * (z - z0).norm_sqr())
            }
        }
    }

    /// Gap of the unit pair divided by the original gap.
    pub fn gap_ratio(&self) -> f64 {
        self.mapped.eps / self.source.eps
    }

    /// Relative mismatch of the two image radii.
    pub fn radius_mismatch(&self) -> f64 {
        let [a, b] = self.image_radii;
        (a - b).abs() / a.max(b)
    }

    /// Source term in the original frame for a source `f` in the mapped
    /// frame: if `ΔU = f` there, then `Δ(U ∘ N) = |N'|² f ∘ N`.
    pub fn pull_back_source<'a>(&'a self, f: impl Fn(C) -> f64 + 'a) -> impl Fn(C) -> f64 + 'a {
        move |z| self.deriv_abs(z).powi(2) * f(self.forward(z))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicReport {
    pub max_residual: f64,
    pub points: usize,
}

/// Five-point Laplacian of `f ∘ N` at the given points with spacing `h`.
pub fn pushforward_harmonic_check(red: &ConformalReduction, f: impl Fn(C) -> f64, points: &[C], h: f64) -> HarmonicReport {
    let comp = |z: C| f(red.forward(z));
    let max_residual = points
        .iter()
        .map(|&z| {
            let lap = comp(z + h) + comp(z - h) + comp(z + C::new(0.0, h)) + comp(z - C::new(0.0, h)) - 4.0 * comp(z);
            (lap / (h * h)).abs()
        })
        .fold(0.0, f64::max);
    HarmonicReport { max_residual, points: points.len() }
}

/// Points in the matrix near the gap, away from both disks, for harmonicity checks.
pub fn gap_neighbourhood(g: &Geometry, n: usize) -> Vec<C> {
    let scale = g.r1.min(g.r2);
    (0..n)
        .map(|k| {
            let th = std::f64::consts::TAU * k as f64 / n as f64;
            C::new(0.0, 0.6 * scale) + 0.25 * scale * C::from_polar(1.0, th)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::fit_circle;

    #[test]
    fn equalizes_radii_for_one_and_two() {
        let g = Geometry::new(0.1, 1.0, 2.0).unwrap();
        let red = build_reduction(&g).unwrap();
        // Independent evaluation of both image radii from the centre/radius formulas.
        let z0 = match red.kind {
            MapKind::Inversion { z0, .. } => z0,
            _ => unreachable!(),
        };
        let img = |c: f64, r: f64| r / (r * r - (z0 - c).powi(2)).abs();
        let (a, b) = (img(0.05 + 1.0, 1.0), img(-0.05 - 2.0, 2.0));
        assert!((a - b).abs() / a < 1e-12);
        assert!(z0 > 0.05 + 4.0);
    }

    #[test]
    fn image_circles_are_unit_circles_of_the_mapped_pair() {
        for (eps, r1, r2) in [(0.1, 1.0, 2.0), (0.01, 3.0, 0.7), (0.3, 0.6, 9.0)] {
            let g = Geometry::new(eps, r1, r2).unwrap();
            let red = build_reduction(&g).unwrap();
            for disk in [1u8, 2] {
                let pts: Vec<C> = (0..64)
                    .map(|k| g.center(disk) + g.radius(disk) * C::from_polar(1.0, std::f64::consts::TAU * k as f64 / 64.0))
                    .map(|z| red.forward(z))
                    .collect();
                let fit = fit_circle(&pts).unwrap();
                assert!(fit.max_residual < 1e-10, "{fit:?}");
                assert!((fit.radius - 1.0).abs() < 1e-10);
                assert!((fit.center - red.mapped.center(disk)).norm() < 1e-10, "disk {disk}: {fit:?}");
            }
        }
    }

    #[test]
    fn round_trip_is_identity() {
        let g = Geometry::new(0.02, 4.0, 4.5).unwrap();
        let red = build_reduction(&g).unwrap();
        for z in [C::new(0.0, 0.0), C::new(0.3, -1.2), C::new(-7.0, 2.0), C::new(4.0, 4.0)] {
            assert!((red.inverse(red.forward(z)) - z).norm() <= 1e-13 * (1.0 + z.norm()));
        }
    }

    #[test]
    fn equal_radii_use_scaling() {
        let g = Geometry::new(0.2, 2.0, 2.0).unwrap();
        assert!(matches!(build_reduction(&g), Err(Error::EqualRadii)));
        let red = reduce(&g).unwrap();
        assert_eq!(red.mapped.eps, 0.1);
        assert_eq!(red.forward(C::new(2.0, 4.0)), C::new(1.0, 2.0));
    }

    #[test]
    fn harmonic_functions_stay_harmonic() {
        let g = Geometry::new(0.05, 0.8, 3.0).unwrap();
        let red = build_reduction(&g).unwrap();
        let pts = gap_neighbourhood(&g, 16);
        let w = C::new(0.0, 5.0);
        assert!(pushforward_harmonic_check(&red, |z| z.re, &pts, 1e-3).max_residual < 1e-6);
        assert!(pushforward_harmonic_check(&red, |z| (z - w).norm().ln(), &pts, 1e-3).max_residual < 1e-6);
    }

    #[test]
    fn sources_pick_up_the_squared_jacobian() {
        let g = Geometry::new(0.05, 0.8, 3.0).unwrap();
        let red = build_reduction(&g).unwrap();
        // U = |w|² solves ΔU = 4 in the mapped frame.
        let src = red.pull_back_source(|_| 4.0);
        let h = 1e-3;
        for z in gap_neighbourhood(&g, 8) {
            let u = |z: C| red.forward(z).norm_sqr();
            let lap = (u(z + h) + u(z - h) + u(z + C::new(0.0, h)) + u(z - C::new(0.0, h)) - 4.0 * u(z)) / (h * h);
            assert!((lap - src(z)).abs() < 1e-5 * src(z).abs().max(1.0), "{lap} vs {}", src(z));
        }
    }

    #[test]
    fn gap_ratio_stays_moderate() {
        for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
            let red = build_reduction(&Geometry::new(eps, 1.0, 2.0).unwrap()).unwrap();
            let ratio = red.gap_ratio();
            assert!((0.01..=100.0).contains(&ratio), "{ratio}");
        }
    }
}
