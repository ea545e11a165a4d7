//! Potentials generated by source data through the two-disk Green's function.
//!
//! For source data `(f1, f2, f3)` the field is
//!
//! ```text
//! u(x) = -w1(x) - w2(x) - w0(x) + w3(x)
//! w_j(x) = (1/2π) ∫_{B_j} ∇_y G(x, y) · (f1, f2)(y) dy      (j = 0, 1, 2)
//! w3(x)  = (1/2π) ∫ G(x, y) f3(y) dy
//! ```
//!
//! which solves `div(a ∇u) = div(f1, f2) + f3` in the plane. The integrals are
//! evaluated by polar quadrature over the support, and the image series is
//! summed once for all quadrature nodes.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{classify_region, ComplexPoint, Geometry, Side};
use crate::green::{image_sum, Conductivity, GreenParams, Mode, Node, MAX_ORDER};
use crate::mobius::real_partial;
use crate::quadrature::{region_nodes, Disk, Quadrature};

/// A scalar field on the plane.
pub type Field = Arc<dyn Fn(C) -> f64 + Send + Sync>;

/// Source data `(f1, f2, f3)` supported in a union of disjoint disks.
#[derive(Clone)]
pub struct SourceData {
    pub f1: Field,
    pub f2: Field,
    pub f3: Field,
    pub support: Vec<Disk>,
    /// Whether `(f1, f2)` may be nonzero.
    divergence_part: bool,
}

impl fmt::Debug for SourceData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SourceData")
            .field("support", &self.support)
            .field("divergence_part", &self.divergence_part)
            .finish_non_exhaustive()
    }
}

fn zero_field() -> Field {
    Arc::new(|_| 0.0)
}

impl SourceData {
    pub fn new(f1: Field, f2: Field, f3: Field, support: Vec<Disk>) -> Result<Self> {
        for (i, a) in support.iter().enumerate() {
            if !(a.radius > 0.0) {
                return Err(Error::InvalidGeometry(format!("support disk {i} has radius {}", a.radius)));
            }
            for b in &support[i + 1..] {
                if (a.center - b.center).norm() < a.radius + b.radius {
                    return Err(Error::InvalidGeometry("support disks overlap".into()));
                }
            }
        }
        Ok(Self { f1, f2, f3, support, divergence_part: true })
    }

    /// Only the non-divergence part `f3` is present.
    pub fn scalar(f3: Field, support: Vec<Disk>) -> Result<Self> {
        let mut s = Self::new(zero_field(), zero_field(), f3, support)?;
        s.divergence_part = false;
        Ok(s)
    }

    pub fn zero() -> Self {
        Self { f1: zero_field(), f2: zero_field(), f3: zero_field(), support: vec![], divergence_part: false }
    }

    /// A normalized Gaussian of width `sigma` at `center`, cut off at `8 sigma`.
    pub fn gaussian(center: C, sigma: f64) -> Result<Self> {
        let f: Field = Arc::new(move |y: C| gaussian_density(y - center, sigma));
        Self::scalar(f, vec![Disk::new(center, 8.0 * sigma)])
    }

    /// A normalized Gaussian at `center` minus its copy at `-center`, so the
    /// total mass is zero.
    pub fn gaussian_dipole(center: C, sigma: f64) -> Result<Self> {
        let f: Field = Arc::new(move |y: C| gaussian_density(y - center, sigma) - gaussian_density(y + center, sigma));
        Self::scalar(f, vec![Disk::new(center, 8.0 * sigma), Disk::new(-center, 8.0 * sigma)])
    }

    fn has_divergence_part(&self) -> bool {
        self.divergence_part
    }
}

fn gaussian_density(d: C, sigma: f64) -> f64 {
    let s2 = sigma * sigma;
    (-d.norm_sqr() / (2.0 * s2)).exp() / (TAU * s2)
}

/// Value or derivative of the represented field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialValue {
    pub value: f64,
    /// `(w0, w1, w2, w3)`; `value = -w1 - w2 - w0 + w3`.
    pub components: [f64; 4],
    pub quad_err_est: f64,
    pub series_err_est: f64,
}

/// All partial derivatives `∂1^{m - j} ∂2^{j}` of one order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeJet {
    pub order: u32,
    /// Indexed by the number of `x2`-derivatives.
    pub partials: Vec<f64>,
    pub quad_err_est: f64,
    pub series_err_est: f64,
    /// Largest series index used over the three source regions.
    pub k_used: usize,
}

impl DerivativeJet {
    /// `max_j |∂1^{m-j} ∂2^j u|`.
    pub fn max_abs(&self) -> f64 {
        self.partials.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

const SIDES: [Side; 3] = [Side::B0, Side::B1, Side::B2];

/// Quadrature nodes of the source data grouped by region.
fn source_nodes(x: C, s: &SourceData, g: &Geometry, q: &Quadrature) -> [Vec<Node>; 3] {
    let mut out: [Vec<Node>; 3] = Default::default();
    for disk in &s.support {
        let dist = (x - disk.center).norm();
        let near = dist < 1.1 * disk.radius;
        let origin = if near { x } else { disk.center };
        for side in SIDES {
            for (y, w) in region_nodes(disk, side, g, origin, q, dist < disk.radius) {
                let f3w = (s.f3)(y) * w;
                let fw = if s.has_divergence_part() { [(s.f1)(y) * w, (s.f2)(y) * w] } else { [0.0; 2] };
                if f3w != 0.0 || fw != [0.0; 2] {
                    out[side.index()].push(Node { y, f3w, fw });
                }
            }
        }
    }
    out
}

fn check_support(x: C, s: &SourceData, order: u32) -> Result<()> {
    let inside = s.support.iter().any(|d| (x - d.center).norm() < d.radius);
    let limit = if s.has_divergence_part() { 1 } else { 2 };
    if inside && order >= limit {
        return Err(Error::EvaluationInSupport { order: order as usize });
    }
    Ok(())
}

/// Complex component sums `(W0, W1, W2, W3)` at one quadrature level.
struct Sums {
    w: [C; 4],
    tail: f64,
    k_used: usize,
}

fn sums(x: C, s: &SourceData, c: &Conductivity, g: &Geometry, p: &GreenParams, q: &Quadrature, order: u32) -> Result<Sums> {
    let xs = classify_region(x, g, 0.0).side();
    let nodes = source_nodes(x, s, g, q);
    let mut out = Sums { w: [C::new(0.0, 0.0); 4], tail: 0.0, k_used: 0 };
    for side in SIDES {
        let group = &nodes[side.index()];
        if group.is_empty() {
            continue;
        }
        let r = image_sum(x, xs, side, group, order, Mode::Full, c, g, p)?;
        out.w[side.index()] += r.h / TAU;
        out.w[3] += r.g / TAU;
        out.tail += r.est_tail / TAU;
        out.k_used = out.k_used.max(r.k_used);
    }
    Ok(out)
}

fn combine(w: &[C; 4]) -> C {
    -w[0] - w[1] - w[2] + w[3]
}

fn evaluate(
    x: C,
    s: &SourceData,
    c: &Conductivity,
    g: &Geometry,
    p: &GreenParams,
    q: &Quadrature,
    order: u32,
) -> Result<(Sums, f64)> {
    if order as usize > MAX_ORDER {
        return Err(Error::DerivativeOrderUnsupported(order as usize));
    }
    if !g.is_unit() {
        return Err(Error::InvalidGeometry("the representation needs r1 = r2 = 1".into()));
    }
    check_support(x, s, order)?;
    let fine = sums(x, s, c, g, p, q, order)?;
    let coarse = sums(x, s, c, g, p, &q.halved(), order)?;
    let total = combine(&fine.w);
    let change = (total - combine(&coarse.w)).norm();
    if change > q.tol * (1.0 + total.norm()) {
        return Err(Error::QuadratureNonConvergent { change, tol: q.tol });
    }
    Ok((fine, change))
}

/// The represented field `u(x)`.
pub fn u_rep(x: ComplexPoint, s: &SourceData, c: &Conductivity, g: &Geometry, p: &GreenParams, q: &Quadrature) -> Result<PotentialValue> {
    d_u_rep(x, s, c, g, p, q, (0, 0))
}

/// `∂1^{m1} ∂2^{m2} u(x)`.
pub fn d_u_rep(
    x: ComplexPoint,
    s: &SourceData,
    c: &Conductivity,
    g: &Geometry,
    p: &GreenParams,
    q: &Quadrature,
    multi_index: (u32, u32),
) -> Result<PotentialValue> {
    let (sm, quad) = evaluate(x, s, c, g, p, q, multi_index.0 + multi_index.1)?;
    let components = sm.w.map(|w| real_partial(w, multi_index.1));
    Ok(PotentialValue {
        value: -components[0] - components[1] - components[2] + components[3],
        components,
        quad_err_est: quad,
        series_err_est: sm.tail,
    })
}

/// Every partial derivative of order `order` at `x` from a single series pass.
pub fn u_rep_jet(
    x: ComplexPoint,
    s: &SourceData,
    c: &Conductivity,
    g: &Geometry,
    p: &GreenParams,
    q: &Quadrature,
    order: u32,
) -> Result<DerivativeJet> {
    let (sm, quad) = evaluate(x, s, c, g, p, q, order)?;
    let total = combine(&sm.w);
    Ok(DerivativeJet {
        order,
        partials: (0..=order).map(|m2| real_partial(total, m2)).collect(),
        quad_err_est: quad,
        series_err_est: sm.tail,
        k_used: sm.k_used,
    })
}

fn region_index(j: usize) -> Result<Side> {
    SIDES.get(j).copied().ok_or_else(|| Error::Config(format!("region index {j} is not 0, 1 or 2")))
}

fn free_space(j: usize, x: C, s: &SourceData, g: &Geometry, q: &Quadrature, kernel: impl Fn(C, &Node) -> f64) -> Result<f64> {
    let side = region_index(j)?;
    let eval = |q: &Quadrature| -> f64 { source_nodes(x, s, g, q)[side.index()].iter().map(|n| kernel(x - n.y, n)).sum() };
    let fine = eval(q);
    let change = (fine - eval(&q.halved())).abs();
    if change > q.tol * (1.0 + fine.abs()) {
        return Err(Error::QuadratureNonConvergent { change, tol: q.tol });
    }
    Ok(fine)
}

/// `h_j(x) = ∫_{B_j} ∇_y log|x - y| · (f1, f2)(y) dy` over the support.
pub fn h_pot(j: usize, x: ComplexPoint, s: &SourceData, g: &Geometry, q: &Quadrature) -> Result<f64> {
    check_support(x, s, 1)?;
    free_space(j, x, s, g, q, |d, n| -(n.fw[0] * d.re + n.fw[1] * d.im) / d.norm_sqr())
}

/// `g_j(x) = ∫_{B_j} log|x - y| f3(y) dy` over the support.
pub fn g_pot(j: usize, x: ComplexPoint, s: &SourceData, g: &Geometry, q: &Quadrature) -> Result<f64> {
    free_space(j, x, s, g, q, |d, n| n.f3w * d.norm().ln())
}
