//! Polar Gauss–Legendre quadrature over a disk intersected with one of the
//! three coefficient regions.
//!
//! Rays are cast from an origin (the disk centre, or the evaluation point
//! when that lies in or near the disk). Along each ray the disk chord is split
//! where it crosses the inclusion circles and only the pieces lying in the
//! requested region are kept. The angular range is cut at every angle where
//! the piece structure changes (tangent rays, circle intersections), and a
//! cosine substitution clusters nodes at those angles where the piece
//! endpoints have square-root behaviour.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::geometry::{classify_region, Geometry, Side};

/// A closed disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: C,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: C, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn contains(&self, z: C) -> bool {
        (z - self.center).norm() <= self.radius
    }
}

/// Node counts of the tensor rule. Each angular panel gets `n_angular`
/// nodes and each radial piece `n_radial`; a rule with `n` nodes is exact for
/// polynomials of degree `2n - 1` in the substituted variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub n_radial: usize,
    pub n_angular: usize,
    /// Largest accepted change between this rule and the rule with half the
    /// nodes, relative to `1 + |value|`.
    pub tol: f64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { n_radial: 64, n_angular: 64, tol: 1e-6 }
    }
}

impl Quadrature {
    pub fn new(n_radial: usize, n_angular: usize) -> Self {
        Self { n_radial, n_angular, ..Self::default() }
    }

    pub fn halved(&self) -> Self {
        Self { n_radial: (self.n_radial / 2).max(2), n_angular: (self.n_angular / 2).max(2), tol: self.tol }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Tricomi's initial guess, then Newton on P_n.
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Rule mapped to `[0, 1]`.
fn unit_rule(n: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    x.iter().zip(&w).map(|(&xi, &wi)| ((xi + 1.0) / 2.0, wi / 2.0)).collect()
}

/// Ray parameters where `|o + r e - c| = radius`, sorted.
fn ray_circle(o: C, e: C, c: C, radius: f64) -> Option<(f64, f64)> {
    let d = o - c;
    let b = (e.conj() * d).re;
    let cc = d.norm_sqr() - radius * radius;
    let disc = b * b - cc;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    // Stable pair of roots of r² + 2br + cc = 0.
    let q = -b - b.signum() * sq;
    if q == 0.0 {
        return Some((0.0, 0.0));
    }
    let (r1, r2) = (q, cc / q);
    Some((r1.min(r2), r1.max(r2)))
}

/// Angles (about `o`) of rays tangent to the circle, if `o` lies outside it.
fn tangent_angles(o: C, c: C, radius: f64) -> Vec<f64> {
    let d = c - o;
    let dist = d.norm();
    if dist <= radius {
        return vec![];
    }
    let half = (radius / dist).asin();
    let mid = d.arg();
    vec![mid - half, mid + half]
}

/// Intersection points of two circles.
fn circle_intersections(c1: C, r1: f64, c2: C, r2: f64) -> Vec<C> {
    let d = c2 - c1;
    let dist = d.norm();
    if dist == 0.0 || dist > r1 + r2 || dist < (r1 - r2).abs() {
        return vec![];
    }
    let a = (r1 * r1 - r2 * r2 + dist * dist) / (2.0 * dist);
    let h = (r1 * r1 - a * a).max(0.0).sqrt();
    let u = d / dist;
    let base = c1 + a * u;
    vec![base + C::i() * u * h, base - C::i() * u * h]
}

/// Quadrature nodes `(y, weight)` for `disk ∩ region(side)`.
///
/// With `singular_origin`, the first radial piece of every ray uses the
/// substitution `r = L s²`, which smooths integrands behaving like `log r`
/// at the origin.
pub fn region_nodes(disk: &Disk, side: Side, g: &Geometry, origin: C, q: &Quadrature, singular_origin: bool) -> Vec<(C, f64)> {
    let circles = [(g.c1, g.r1), (g.c2, g.r2)];
    let inside = (origin - disk.center).norm() < disk.radius;
    let (lo, span) = if inside {
        (0.0, TAU)
    } else {
        let t = tangent_angles(origin, disk.center, disk.radius);
        (t[0], t[1] - t[0])
    };
    let wrap = |a: f64| lo + (a - lo).rem_euclid(TAU);
    let mut cuts = vec![lo, lo + span];
    for &(c, r) in &circles {
        for a in tangent_angles(origin, c, r) {
            cuts.push(wrap(a));
        }
        for p in circle_intersections(disk.center, disk.radius, c, r) {
            if (p - origin).norm() > 0.0 {
                cuts.push(wrap((p - origin).arg()));
            }
        }
    }
    cuts.retain(|&a| a >= lo && a <= lo + span);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-13);

    let ang = unit_rule(q.n_angular);
    let rad = unit_rule(q.n_radial);
    let mut nodes = Vec::new();
    let mut splits = Vec::with_capacity(6);
    for panel in cuts.windows(2) {
        let (ta, tb) = (panel[0], panel[1]);
        let width = tb - ta;
        if width <= 0.0 {
            continue;
        }
        for &(t, wt) in &ang {
            let theta = ta + width * (1.0 - (PI * t).cos()) / 2.0;
            let dtheta = width * PI * (PI * t).sin() / 2.0 * wt;
            let e = C::from_polar(1.0, theta);
            let Some((r_a, r_b)) = ray_circle(origin, e, disk.center, disk.radius) else {
                continue;
            };
            let (r_in, r_out) = (r_a.max(0.0), r_b);
            if r_out <= r_in {
                continue;
            }
            splits.clear();
            splits.push(r_in);
            for &(c, r) in &circles {
                if let Some((s1, s2)) = ray_circle(origin, e, c, r) {
                    for s in [s1, s2] {
                        if s > r_in && s < r_out {
                            splits.push(s);
                        }
                    }
                }
            }
            splits.push(r_out);
            splits.sort_by(f64::total_cmp);
            for (idx, piece) in splits.windows(2).enumerate() {
                let (ra, rb) = (piece[0], piece[1]);
                let len = rb - ra;
                if len <= 1e-14 * (1.0 + rb) {
                    continue;
                }
                let mid = origin + e * (ra + len / 2.0);
                if classify_region(mid, g, 0.0).side() != side {
                    continue;
                }
                let squared = singular_origin && idx == 0 && ra == 0.0;
                for &(s, ws) in &rad {
                    let (r, dr) = if squared { (len * s * s, 2.0 * len * s * ws) } else { (ra + len * s, len * ws) };
                    nodes.push((origin + e * r, dtheta * dr * r));
                }
            }
        }
    }
    nodes
}

#[cfg(test)]
mod tests {
    use super::*;

    fn area(nodes: &[(C, f64)]) -> f64 {
        nodes.iter().map(|n| n.1).sum()
    }

    #[test]
    fn gauss_legendre_exactness() {
        for n in [1, 2, 5, 16, 64] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for deg in 0..(2 * n).min(40) {
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                let got: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
                assert!((got - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
        let (x, _) = gauss_legendre(2);
        assert!((x[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn disk_far_from_inclusions() {
        let g = Geometry::unit(0.1).unwrap();
        let d = Disk::new(C::new(0.0, 4.0), 0.7);
        let q = Quadrature::new(16, 16);
        let nodes = region_nodes(&d, Side::B0, &g, d.center, &q, false);
        assert!((area(&nodes) - PI * 0.49).abs() < 1e-13);
        assert!(region_nodes(&d, Side::B1, &g, d.center, &q, false).is_empty());
        // second moment about the centre: π ρ⁴ / 2
        let m2: f64 = nodes.iter().map(|(y, w)| w * (y - d.center).norm_sqr()).sum();
        assert!((m2 - PI * 0.7f64.powi(4) / 2.0).abs() < 1e-13);
    }

    fn lens_area(d: f64, r1: f64, r2: f64) -> f64 {
        let a1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).acos();
        let a2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).acos();
        r1 * r1 * a1 + r2 * r2 * a2 - 0.5 * ((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)).sqrt()
    }

    #[test]
    fn lens_areas_and_partition() {
        let g = Geometry::unit(0.1).unwrap();
        let q = Quadrature::new(32, 32);
        for (centre, origin) in [(C::new(0.0, 0.3), C::new(0.0, 0.3)), (C::new(0.2, 0.8), C::new(0.1, 0.7)), (C::new(0.0, 0.3), C::new(0.0, 1.9))] {
            let d = Disk::new(centre, 0.9);
            let a: Vec<f64> = [Side::B0, Side::B1, Side::B2]
                .iter()
                .map(|&s| area(&region_nodes(&d, s, &g, origin, &q, false)))
                .collect();
            let exact1 = lens_area((centre - g.c1).norm(), 0.9, 1.0);
            let exact2 = lens_area((centre - g.c2).norm(), 0.9, 1.0);
            assert!((a[1] - exact1).abs() < 1e-9, "{} vs {exact1}", a[1]);
            assert!((a[2] - exact2).abs() < 1e-9, "{} vs {exact2}", a[2]);
            assert!((a.iter().sum::<f64>() - PI * 0.81).abs() < 1e-9);
        }
    }

    #[test]
    fn log_singularity_at_the_origin() {
        // ∫ log|y - c| over the unit disk about c is -π/2.
        let g = Geometry::unit(0.1).unwrap();
        let d = Disk::new(g.c1, 1.0);
        for (n, tol) in [(24, 1e-9), (64, 1e-12)] {
            let nodes = region_nodes(&d, Side::B1, &g, g.c1, &Quadrature::new(n, n), true);
            let v: f64 = nodes.iter().map(|(y, w)| w * (y - g.c1).norm().ln()).sum();
            assert!((v + PI / 2.0).abs() < tol, "{n}: {v}");
        }
    }
}
