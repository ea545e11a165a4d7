//! Complex-plane geometry of the two-inclusion configuration.
//!
//! Points of the plane are identified with complex numbers. The inclusions are
//! the open disks `B1 = B_{r1}(eps/2 + r1, 0)` and `B2 = B_{r2}(-eps/2 - r2, 0)`,
//! separated by a gap of width `eps` centred at the origin; `B0` is the
//! complement of their closures.
//!
//! The composed map `psi = Phi2 ∘ Phi1` (reflect across `∂B1`, then across
//! `∂B2`) is a holomorphic Möbius map. For unit radii it becomes
//! `z ↦ -1/z - 2(2a² - 1)` in the *transformed* frame `w = 2az - (2a² - 1)`,
//! `a = 1 + eps/2`, where its iterates have a closed form in terms of the
//! repelling/attracting fixed points `lambda1`, `lambda2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the plane, `x = (x1, x2) ↦ x1 + i x2`.
pub type ComplexPoint = Complex64;

/// Two disjoint disks with a gap of width `eps` straddling the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub eps: f64,
    pub r1: f64,
    pub r2: f64,
    pub c1: ComplexPoint,
    pub c2: ComplexPoint,
}

impl Geometry {
    pub fn new(eps: f64, r1: f64, r2: f64) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::InvalidGeometry(format!("gap width must be positive, got {eps}")));
        }
        for (name, r) in [("r1", r1), ("r2", r2)] {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::InvalidGeometry(format!("{name} must be positive, got {r}")));
            }
        }
        Ok(Self {
            eps,
            r1,
            r2,
            c1: ComplexPoint::new(eps / 2.0 + r1, 0.0),
            c2: ComplexPoint::new(-eps / 2.0 - r2, 0.0),
        })
    }

    /// Unit radii, the setting in which the series Green's function is available.
    pub fn unit(eps: f64) -> Result<Self> {
        Self::new(eps, 1.0, 1.0)
    }

    pub fn is_unit(&self) -> bool {
        self.r1 == 1.0 && self.r2 == 1.0
    }

    /// `eps ∈ (0, 1/2)`, the range covered by the boundedness theorems.
    pub fn in_theorem_regime(&self) -> bool {
        self.eps > 0.0 && self.eps < 0.5
    }

    /// Half the distance between the centres for unit radii, `a = 1 + eps/2`.
    pub fn a(&self) -> f64 {
        1.0 + self.eps / 2.0
    }

    /// `2a² - 1` evaluated without cancellation for small `eps`.
    pub(crate) fn two_a_sq_minus_one(&self) -> f64 {
        1.0 + self.eps * (2.0 + self.eps / 2.0)
    }

    pub fn center(&self, disk: u8) -> ComplexPoint {
        if disk == 1 {
            self.c1
        } else {
            self.c2
        }
    }

    pub fn radius(&self, disk: u8) -> f64 {
        if disk == 1 {
            self.r1
        } else {
            self.r2
        }
    }

    /// Distance from `x` to the nearer interface circle.
    pub fn interface_distance(&self, x: ComplexPoint) -> f64 {
        let d1 = ((x - self.c1).norm() - self.r1).abs();
        let d2 = ((x - self.c2).norm() - self.r2).abs();
        d1.min(d2)
    }
}

/// Region of the plane a point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    B0,
    B1,
    B2,
    InterfaceB1,
    InterfaceB2,
}

/// The three pieces on which the coefficient is constant; interface points
/// are attached to the closed disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    B0,
    B1,
    B2,
}

impl Region {
    pub fn side(self) -> Side {
        match self {
            Region::B0 => Side::B0,
            Region::B1 | Region::InterfaceB1 => Side::B1,
            Region::B2 | Region::InterfaceB2 => Side::B2,
        }
    }

    pub fn is_interface(self) -> bool {
        matches!(self, Region::InterfaceB1 | Region::InterfaceB2)
    }
}

impl Side {
    pub fn index(self) -> usize {
        match self {
            Side::B0 => 0,
            Side::B1 => 1,
            Side::B2 => 2,
        }
    }
}

/// Classifies `x`. Points within `tol` of a circle (plus a few ulps) are
/// reported as interface points.
pub fn classify_region(x: ComplexPoint, g: &Geometry, tol: f64) -> Region {
    let slack = |c: ComplexPoint, r: f64| tol + 8.0 * f64::EPSILON * (r + c.norm());
    let d1 = (x - g.c1).norm();
    if (d1 - g.r1).abs() <= slack(g.c1, g.r1) {
        return Region::InterfaceB1;
    }
    if d1 < g.r1 {
        return Region::B1;
    }
    let d2 = (x - g.c2).norm();
    if (d2 - g.r2).abs() <= slack(g.c2, g.r2) {
        return Region::InterfaceB2;
    }
    if d2 < g.r2 {
        return Region::B2;
    }
    Region::B0
}

/// Reflection of `x` across the circle `|z - center| = radius`.
pub fn invert(x: ComplexPoint, center: ComplexPoint, radius: f64) -> Option<ComplexPoint> {
    let d = x - center;
    if d.norm_sqr() == 0.0 {
        return None;
    }
    Some(center + radius * radius / d.conj())
}

/// Inversion across `∂B1`.
pub fn phi1(x: ComplexPoint, g: &Geometry) -> Result<ComplexPoint> {
    invert(x, g.c1, g.r1).ok_or(Error::PoleAtCenter { disk: 1 })
}

/// Inversion across `∂B2`.
pub fn phi2(x: ComplexPoint, g: &Geometry) -> Result<ComplexPoint> {
    invert(x, g.c2, g.r2).ok_or(Error::PoleAtCenter { disk: 2 })
}

/// `(Phi2 ∘ Phi1)^k (x)` by literal iteration in the original frame.
pub fn psi_iterate(x: ComplexPoint, k: usize, g: &Geometry) -> Result<ComplexPoint> {
    let mut z = x;
    for step in 0..k {
        z = phi1(z, g).map_err(|_| Error::PoleEncountered { step })?;
        z = phi2(z, g).map_err(|_| Error::PoleEncountered { step })?;
    }
    Ok(z)
}

/// Coordinate frame for the closed-form iterates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    Original,
    Transformed,
}

/// `z ↦ 2az - (2a² - 1)`.
pub fn to_transformed(z: ComplexPoint, g: &Geometry) -> ComplexPoint {
    2.0 * g.a() * z - g.two_a_sq_minus_one()
}

pub fn from_transformed(w: ComplexPoint, g: &Geometry) -> ComplexPoint {
    (w + g.two_a_sq_minus_one()) / (2.0 * g.a())
}

/// The two real fixed points of `psi` in the transformed frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoints {
    /// Repelling fixed point, `-1 < lambda1 < 0`.
    pub lambda1: f64,
    /// Attracting fixed point, `lambda2 < -1`.
    pub lambda2: f64,
}

pub fn fixed_points(g: &Geometry) -> FixedPoints {
    let a = g.a();
    // a² - 1 = eps (1 + eps/4)
    let root = (g.eps * (1.0 + g.eps / 4.0)).sqrt();
    let lambda2 = -g.two_a_sq_minus_one() - 2.0 * a * root;
    // lambda1 lambda2 = 1; the direct formula cancels for small eps.
    FixedPoints { lambda1: 1.0 / lambda2, lambda2 }
}

/// `psi` in the transformed frame, `-1/z - 2(2a² - 1)`.
pub fn psi_transformed(z: ComplexPoint, g: &Geometry) -> ComplexPoint {
    -1.0 / z - 2.0 * g.two_a_sq_minus_one()
}

/// `I_k(z) = (z - 1/lambda2) - |lambda2|^{-k} (z - lambda2)` (transformed frame).
pub fn i_k(z: ComplexPoint, k: i32, g: &Geometry) -> ComplexPoint {
    let l2 = fixed_points(g).lambda2;
    let decay = l2.abs().powi(-k);
    (z - 1.0 / l2) - decay * (z - l2)
}

/// The factored form `(z - 1/lambda2)(1 - |lambda2|^{-k}) + (lambda2 - 1/lambda2)|lambda2|^{-k}`.
pub fn i_k_factored(z: ComplexPoint, k: i32, g: &Geometry) -> ComplexPoint {
    let l2 = fixed_points(g).lambda2;
    let decay = l2.abs().powi(-k);
    (z - 1.0 / l2) * (1.0 - decay) + (l2 - 1.0 / l2) * decay
}

fn checked_i2k(z: ComplexPoint, k: usize, g: &Geometry) -> Result<ComplexPoint> {
    let i2k = i_k(z, 2 * k as i32, g);
    let threshold = 1e3 * f64::EPSILON * (1.0 + z.norm());
    if i2k.norm() < threshold {
        return Err(Error::DegenerateI { magnitude: i2k.norm(), threshold });
    }
    Ok(i2k)
}

/// Closed-form `psi^k(z)`; in the original frame the transformed formula is
/// conjugated by `to_transformed`.
pub fn psi_pow(z: ComplexPoint, k: usize, g: &Geometry, frame: Frame) -> Result<ComplexPoint> {
    if !g.is_unit() {
        return Err(Error::InvalidGeometry("closed-form iterates need unit radii".into()));
    }
    let w = match frame {
        Frame::Original => to_transformed(z, g),
        Frame::Transformed => z,
    };
    let l2 = fixed_points(g).lambda2;
    let i2k = checked_i2k(w, k, g)?;
    let kk = k as i32;
    let image = l2 + (l2 * l2 - 1.0) * l2.powi(-2 * kk - 1) * (w - l2) / i2k;
    Ok(match frame {
        Frame::Original => from_transformed(image, g),
        Frame::Transformed => image,
    })
}

/// `order`-th complex derivative of `psi^k` at `z` (transformed frame).
pub fn d_psi_pow(z: ComplexPoint, k: usize, order: u32, g: &Geometry) -> Result<ComplexPoint> {
    if order == 0 {
        return psi_pow(z, k, g, Frame::Transformed);
    }
    let l2 = fixed_points(g).lambda2;
    let i2k = checked_i2k(z, k, g)?;
    let kk = k as i32;
    let alpha = order as i32;
    let gap = l2 - 1.0 / l2;
    let decay = l2.powi(-2 * kk);
    let sign = if (alpha - 1) % 2 == 0 { 1.0 } else { -1.0 };
    let factorial: f64 = (1..=order).map(f64::from).product();
    let scalar = gap * gap * decay * sign * factorial * (1.0 - decay).powi(alpha - 1);
    Ok(scalar * i2k.powi(-(alpha + 1)))
}

/// Algebraic least-squares circle fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleFit {
    pub center: ComplexPoint,
    pub radius: f64,
    /// Largest `| |p - center| - radius |` over the fitted points.
    pub max_residual: f64,
}

/// Fits `x² + y² + Dx + Ey + F = 0` to the points; the points are centred and
/// scaled first so the normal equations stay well conditioned.
pub fn fit_circle(points: &[ComplexPoint]) -> Option<CircleFit> {
    if points.len() < 3 {
        return None;
    }
    let n = points.len() as f64;
    let mean = points.iter().sum::<ComplexPoint>() / n;
    let scale = points.iter().map(|p| (p - mean).norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    let mut m = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for p in points {
        let q = (p - mean) / scale;
        let row = [q.re, q.im, 1.0];
        let target = -(q.re * q.re + q.im * q.im);
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += row[i] * row[j];
            }
            rhs[i] += row[i] * target;
        }
    }
    let sol = solve3(m, rhs)?;
    let c = ComplexPoint::new(-sol[0] / 2.0, -sol[1] / 2.0);
    let r2 = c.norm_sqr() - sol[2];
    if r2 <= 0.0 {
        return None;
    }
    let center = mean + c * scale;
    let radius = r2.sqrt() * scale;
    let max_residual = points
        .iter()
        .map(|p| ((p - center).norm() - radius).abs())
        .fold(0.0, f64::max);
    Some(CircleFit { center, radius, max_residual })
}

fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| m[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / m[row][row];
    }
    Some(x)
}
