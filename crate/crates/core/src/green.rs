//! Series Green's function for the two-disk transmission problem.
//!
//! For a source `y` and an evaluation point `x`, the function is a finite
//! number of free-space log kernels plus geometric series of image terms
//! `(αβ)^k log|W_k(x) - y|`, where `W_k` is the k-th power of one of the
//! composed inversions `P = Φ1∘Φ2` or `ψ = Φ2∘Φ1`, possibly preceded by a
//! single inversion. Which terms appear depends on the regions of `x` and `y`.
//!
//! All image maps are carried as Möbius matrices, so the x-derivatives and
//! y-gradients of every term are available in closed form.

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{classify_region, fixed_points, ComplexPoint, Geometry, Side};
use crate::mobius::{real_partial, ImageMap};

/// Highest supported derivative order.
pub const MAX_ORDER: usize = 6;

/// Conductivities `k1`, `k2` of the inclusions (background `k0 = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conductivity {
    pub k1: f64,
    pub k2: f64,
    pub alpha: f64,
    pub beta: f64,
    /// `-alpha * beta`.
    pub gamma: f64,
}

impl Conductivity {
    pub const K0: f64 = 1.0;

    pub fn new(k1: f64, k2: f64) -> Result<Self> {
        for (name, k) in [("k1", k1), ("k2", k2)] {
            if !(k.is_finite() && k > 0.0) {
                return Err(Error::InvalidConductivity(format!("{name} must be positive and finite, got {k}")));
            }
        }
        let alpha = (k1 - 1.0) / (k1 + 1.0);
        let beta = (k2 - 1.0) / (k2 + 1.0);
        Ok(Self { k1, k2, alpha, beta, gamma: -alpha * beta })
    }

    /// `k1 < 1 < k2` with `gamma ∈ (1/2, 1)`.
    pub fn in_theorem_regime(&self) -> bool {
        self.k1 < 1.0 && self.k2 > 1.0 && self.gamma > 0.5 && self.gamma < 1.0
    }

    /// Coefficient `a(x)` on a side.
    pub fn on(&self, side: Side) -> f64 {
        match side {
            Side::B0 => Self::K0,
            Side::B1 => self.k1,
            Side::B2 => self.k2,
        }
    }
}

/// Series truncation controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenParams {
    /// Target absolute tail of every series.
    pub tol: f64,
    pub k_max: usize,
    /// Step for finite-difference cross-checks of derivatives.
    pub deriv_step: f64,
}

impl Default for GreenParams {
    fn default() -> Self {
        Self { tol: 1e-12, k_max: 1_000_000, deriv_step: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenValue {
    pub value: f64,
    /// Index of the last series term evaluated.
    pub k_used: usize,
    pub est_tail: f64,
}

/// `𝒢(x, y)`, the series without the constant-flux correction.
pub fn green_script(x: ComplexPoint, y: ComplexPoint, c: &Conductivity, g: &Geometry, p: &GreenParams) -> Result<GreenValue> {
    point_eval(x, y, c, g, p, (0, 0), Mode::Script)
}

/// `G(x, y)`: `𝒢(x, y)` plus, for `y` inside an inclusion, the image of a
/// source at that inclusion's centre weighted by `α/(1-α)` (resp. `β/(1-β)`).
pub fn green(x: ComplexPoint, y: ComplexPoint, c: &Conductivity, g: &Geometry, p: &GreenParams) -> Result<GreenValue> {
    point_eval(x, y, c, g, p, (0, 0), Mode::Full)
}

/// `∂1^{m1} ∂2^{m2} G(x, y)` with respect to `x`.
pub fn d_green(
    x: ComplexPoint,
    y: ComplexPoint,
    c: &Conductivity,
    g: &Geometry,
    p: &GreenParams,
    multi_index: (u32, u32),
) -> Result<GreenValue> {
    let m = (multi_index.0 + multi_index.1) as usize;
    if m > MAX_ORDER {
        return Err(Error::DerivativeOrderUnsupported(m));
    }
    point_eval(x, y, c, g, p, multi_index, Mode::Full)
}

/// `∇_y ∂1^{m1} ∂2^{m2} G(x, y)`; the correction part is independent of `y`.
pub fn grad_y_green(
    x: ComplexPoint,
    y: ComplexPoint,
    c: &Conductivity,
    g: &Geometry,
    p: &GreenParams,
    multi_index: (u32, u32),
) -> Result<[GreenValue; 2]> {
    let m = (multi_index.0 + multi_index.1) as usize;
    if m > MAX_ORDER {
        return Err(Error::DerivativeOrderUnsupported(m));
    }
    let mut out = [GreenValue { value: 0.0, k_used: 0, est_tail: 0.0 }; 2];
    for (dir, slot) in out.iter_mut().enumerate() {
        let mut fw = [0.0; 2];
        fw[dir] = 1.0;
        let node = Node { y, f3w: 0.0, fw };
        let (xs, ys) = sides(x, y, g)?;
        let s = image_sum(x, xs, ys, &[node], multi_index.0 + multi_index.1, Mode::Full, c, g, p)?;
        *slot = GreenValue { value: real_partial(s.h, multi_index.1), k_used: s.k_used, est_tail: s.est_tail };
    }
    Ok(out)
}

fn sides(x: ComplexPoint, y: ComplexPoint, g: &Geometry) -> Result<(Side, Side)> {
    if !g.is_unit() {
        return Err(Error::InvalidGeometry("the series Green's function needs r1 = r2 = 1".into()));
    }
    if x == y {
        return Err(Error::CoincidentPoints);
    }
    Ok((classify_region(x, g, 0.0).side(), classify_region(y, g, 0.0).side()))
}

fn point_eval(
    x: ComplexPoint,
    y: ComplexPoint,
    c: &Conductivity,
    g: &Geometry,
    p: &GreenParams,
    m: (u32, u32),
    mode: Mode,
) -> Result<GreenValue> {
    let (xs, ys) = sides(x, y, g)?;
    let node = Node { y, f3w: 1.0, fw: [0.0; 2] };
    let s = image_sum(x, xs, ys, &[node], m.0 + m.1, mode, c, g, p)?;
    Ok(GreenValue { value: real_partial(s.g, m.1), k_used: s.k_used, est_tail: s.est_tail })
}

/// A weighted source point: `f3w` multiplies `G`, `fw` multiplies `∇_y G`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Node {
    pub y: C,
    pub f3w: f64,
    pub fw: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Mode {
    Script,
    Full,
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct SeriesSum {
    /// `Σ f3w ∂^m G(x, y)` in complex form.
    pub g: C,
    /// `Σ fw · ∇_y ∂^m G(x, y)` in complex form.
    pub h: C,
    pub k_used: usize,
    pub est_tail: f64,
}

#[derive(Debug, Clone, Copy)]
enum Step {
    P,
    Psi,
}

#[derive(Debug, Clone, Copy)]
enum Start {
    Id,
    Phi1,
    Phi2,
}

/// `coef · Σ_{k >= k0} (αβ)^k log|Step^k(Start(x)) - y|`.
#[derive(Debug, Clone, Copy)]
struct Channel {
    coef: f64,
    step: Step,
    start: Start,
    k0: usize,
}

/// `coef · log|Start(x) - y|`, optionally fused with `log|x - centre|`.
#[derive(Debug, Clone, Copy)]
struct Single {
    coef: f64,
    start: Start,
    fused: bool,
}

fn ch(coef: f64, step: Step, start: Start, k0: usize) -> Channel {
    Channel { coef, step, start, k0 }
}

fn single(coef: f64, start: Start, fused: bool) -> Single {
    Single { coef, start, fused }
}

/// Terms of the series for a source on side `y` and evaluation on side `x`.
fn table(y: Side, x: Side, c: &Conductivity, fuse: bool) -> (Vec<Single>, Vec<Channel>) {
    use Side::*;
    use Start::*;
    use Step::*;
    let (k1, k2, al, be) = (c.k1, c.k2, c.alpha, c.beta);
    let c1 = 2.0 / (k1 + 1.0);
    let c2 = 2.0 / (k2 + 1.0);
    let cross = 4.0 / ((k1 + 1.0) * (k2 + 1.0));
    match (y, x) {
        (B0, B1) => (vec![], vec![ch(c1, P, Id, 0), ch(-c1 * be, Psi, Phi2, 0)]),
        (B0, B0) => (
            vec![single(1.0, Id, false)],
            vec![ch(1.0, P, Id, 1), ch(1.0, Psi, Id, 1), ch(-be, Psi, Phi2, 0), ch(-al, P, Phi1, 0)],
        ),
        (B0, B2) => (vec![], vec![ch(c2, Psi, Id, 0), ch(-c2 * al, P, Phi1, 0)]),
        (B1, B1) => (
            vec![single(1.0 / k1, Id, false), single(al / k1, Phi1, fuse)],
            vec![ch(-4.0 * be / ((k1 + 1.0) * (k1 + 1.0)), Psi, Phi2, 0)],
        ),
        (B1, B0) => (vec![], vec![ch(c1, Psi, Id, 0), ch(-c1 * be, Psi, Phi2, 0)]),
        (B1, B2) => (vec![], vec![ch(cross, Psi, Id, 0)]),
        (B2, B1) => (vec![], vec![ch(cross, P, Id, 0)]),
        (B2, B0) => (vec![], vec![ch(c2, P, Id, 0), ch(-c2 * al, P, Phi1, 0)]),
        (B2, B2) => (
            vec![single(1.0 / k2, Id, false), single(be / k2, Phi2, fuse)],
            vec![ch(-4.0 * al / ((k2 + 1.0) * (k2 + 1.0)), P, Phi1, 0)],
        ),
    }
}

struct Maps {
    phi1: ImageMap,
    phi2: ImageMap,
    p: ImageMap,
    psi: ImageMap,
}

impl Maps {
    fn new(g: &Geometry) -> Self {
        let phi1 = ImageMap::inversion(g.c1, g.r1);
        let phi2 = ImageMap::inversion(g.c2, g.r2);
        Self { p: phi1.compose(&phi2), psi: phi2.compose(&phi1), phi1, phi2 }
    }

    fn start(&self, s: Start) -> ImageMap {
        match s {
            Start::Id => ImageMap::identity(),
            Start::Phi1 => self.phi1,
            Start::Phi2 => self.phi2,
        }
    }

    fn step(&self, s: Step) -> &ImageMap {
        match s {
            Step::P => &self.p,
            Step::Psi => &self.psi,
        }
    }
}

/// Contribution of one image map over `nodes`: complex g- and h-sums.
#[allow(clippy::too_many_arguments)]
fn map_contribution(map: &ImageMap, fused: bool, x: C, nodes: &[Node], order: u32, k: usize, identity: bool) -> Result<(C, C)> {
    let anti_i = if map.is_anti() { C::new(0.0, -1.0) } else { C::new(0.0, 1.0) };
    let mut gsum = C::new(0.0, 0.0);
    let mut hsum = C::new(0.0, 0.0);
    for node in nodes {
        let kern = map.kernel(x, node.y);
        if kern.is_singular() {
            return Err(if identity { Error::CoincidentPoints } else { Error::SingularSourcePoint });
        }
        if node.f3w != 0.0 {
            let v = match (order, fused) {
                (0, false) => C::new(kern.value(), 0.0),
                (0, true) => C::new(kern.fused_value(), 0.0),
                (_, false) => kern.dx(order),
                (_, true) => kern.fused_dx(order),
            };
            if !v.is_finite() {
                return Err(Error::PoleEncountered { step: k });
            }
            gsum += node.f3w * v;
        }
        if node.fw != [0.0, 0.0] {
            hsum += (node.fw[0] + anti_i * node.fw[1]) * kern.dy_dx(order);
        }
    }
    Ok((gsum, hsum))
}

/// Sums the series for all `nodes` (all on side `y_side`) at `x`.
///
/// The result holds complex sums `S` such that the real derivative
/// `∂1^{m1} ∂2^{m2}` with `m1 + m2 = order` is `Re(i^{m2} S)`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn image_sum(
    x: C,
    x_side: Side,
    y_side: Side,
    nodes: &[Node],
    order: u32,
    mode: Mode,
    c: &Conductivity,
    g: &Geometry,
    p: &GreenParams,
) -> Result<SeriesSum> {
    let maps = Maps::new(g);
    let fuse = mode == Mode::Full;
    let (singles, channels) = table(y_side, x_side, c, fuse);

    // The correction G(x, c_j) enters through the channels only; its
    // free-space part is absorbed into the fused single term.
    let mut all: Vec<Node> = nodes.to_vec();
    let regular = all.len();
    if mode == Mode::Full && y_side != Side::B0 {
        let (kappa, centre) = match y_side {
            Side::B1 => ((c.k1 - 1.0) / 2.0, g.c1),
            _ => ((c.k2 - 1.0) / 2.0, g.c2),
        };
        if !kappa.is_finite() {
            return Err(Error::DegenerateCorrection(format!("factor {kappa}")));
        }
        let mass: f64 = nodes.iter().map(|n| n.f3w).sum();
        if kappa != 0.0 && mass != 0.0 {
            all.push(Node { y: centre, f3w: kappa * mass, fw: [0.0; 2] });
        }
    }

    let mut out = SeriesSum::default();
    for s in &singles {
        if s.coef == 0.0 {
            continue;
        }
        let map = maps.start(s.start);
        let identity = matches!(s.start, Start::Id);
        let (gv, hv) = map_contribution(&map, s.fused, x, &all[..regular], order, 0, identity)?;
        out.g += s.coef * gv;
        out.h += s.coef * hv;
    }

    if channels.is_empty() {
        return Ok(out);
    }
    let rho = c.alpha * c.beta;
    let l2 = fixed_points(g).lambda2;
    let gamma = rho.abs().max(1.0 / (l2 * l2));
    let ratio = gamma / (1.0 - gamma);
    let mut current: Vec<ImageMap> = channels.iter().map(|ch| maps.start(ch.start)).collect();
    let k_min = channels.iter().map(|ch| ch.k0).max().unwrap_or(0) + 1;
    let mut weight = 1.0;
    let mut prev = 0.0f64;
    for k in 0..=p.k_max {
        let mut t_abs = 0.0;
        for (i, chn) in channels.iter().enumerate() {
            if k >= chn.k0 && chn.coef != 0.0 && weight != 0.0 {
                let identity = k == 0 && matches!(chn.start, Start::Id);
                let (gv, hv) = map_contribution(&current[i], false, x, &all, order, k, identity)?;
                let (tg, th) = (chn.coef * weight * gv, chn.coef * weight * hv);
                out.g += tg;
                out.h += th;
                t_abs += tg.norm() + th.norm();
            }
            current[i] = maps.step(chn.step).compose(&current[i]);
        }
        if k >= k_min {
            let tail = t_abs.max(prev * gamma) * ratio;
            if tail <= p.tol {
                out.k_used = k;
                out.est_tail = tail;
                return Ok(out);
            }
        }
        prev = t_abs;
        weight *= rho;
    }
    Err(Error::TruncationFailure { k_max: p.k_max, tol: p.tol, tail: prev * ratio })
}

/// Largest one-sided jumps of `G(·, y)` and of `a ∂_ν G(·, y)` across the
/// two interface circles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterfaceReport {
    pub value_jump: f64,
    pub flux_jump: f64,
    pub points: usize,
}

/// Samples `n` points on each circle. One-sided values and normal derivatives
/// come from quadratic extrapolation of samples at distances `h, 2h, 3h`.
pub fn interface_check(
    y: ComplexPoint,
    c: &Conductivity,
    g: &Geometry,
    p: &GreenParams,
    n: usize,
    h: f64,
) -> Result<InterfaceReport> {
    let mut report = InterfaceReport { value_jump: 0.0, flux_jump: 0.0, points: 0 };
    for (centre, radius, k_in) in [(g.c1, g.r1, c.k1), (g.c2, g.r2, c.k2)] {
        for i in 0..n {
            let theta = std::f64::consts::TAU * (i as f64 + 0.5) / n as f64;
            let normal = C::from_polar(1.0, theta);
            let xb = centre + radius * normal;
            let side = |sign: f64| -> Result<(f64, f64)> {
                let f = |j: f64| green(xb + sign * j * h * normal, y, c, g, p).map(|v| v.value);
                let (f1, f2, f3) = (f(1.0)?, f(2.0)?, f(3.0)?);
                let value = 3.0 * f1 - 3.0 * f2 + f3;
                let outward = sign * (-2.5 * f1 + 4.0 * f2 - 1.5 * f3) / h;
                Ok((value, outward))
            };
            let (v_in, d_in) = side(-1.0)?;
            let (v_out, d_out) = side(1.0)?;
            report.value_jump = report.value_jump.max((v_in - v_out).abs());
            report.flux_jump = report.flux_jump.max((k_in * d_in - d_out).abs());
            report.points += 1;
        }
    }
    Ok(report)
}

/// `a(x) Δ_h G(x, y)` with the 5-point stencil of spacing `h`.
pub fn laplacian_residual(
    x: ComplexPoint,
    y: ComplexPoint,
    c: &Conductivity,
    g: &Geometry,
    p: &GreenParams,
    h: f64,
) -> Result<f64> {
    let f = |z: C| green(z, y, c, g, p).map(|v| v.value);
    let lap = (f(x + h)? + f(x - h)? + f(x + C::i() * h)? + f(x - C::i() * h)? - 4.0 * f(x)?) / (h * h);
    Ok(c.on(classify_region(x, g, 0.0).side()) * lap)
}
