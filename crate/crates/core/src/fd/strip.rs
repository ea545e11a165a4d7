//! Laplace equation in the thin region between two graphs, grounded below
//! and insulated above.
//!
//! The region `{|x'| < W, -ε/2 + h2(x') < x_n < ε/2 + h1(x')}` is flattened
//! by `x_n = h2(x') - ε/2 + t δ(x')`, `δ = ε + h1 - h2`, onto the rectangle
//! `[-W, W] × [0, 1]`. In `(x', t)` the equation becomes `div(b ∇u) = 0` with
//!
//! ```text
//! b = δ [[1, τ], [τ, τ² + 1/δ²]],   τ = -(h2' + t δ') / δ,
//! ```
//!
//! which is discretized with bilinear elements and solved directly.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::banded::BandMatrix;
use crate::error::{Error, Result};

/// Shape of the two boundary graphs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StripShape {
    /// `h1 = h2 = 0`.
    Flat,
    /// `h1 = κ x'²/2`, `h2 = -κ x'²/2`.
    Parabolic { curvature: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripDomain {
    pub eps: f64,
    pub half_width: f64,
    pub shape: StripShape,
}

impl StripDomain {
    pub fn flat(eps: f64) -> Result<Self> {
        Self::new(eps, 1.0, StripShape::Flat)
    }

    pub fn parabolic(eps: f64) -> Result<Self> {
        Self::new(eps, 1.0, StripShape::Parabolic { curvature: 1.0 })
    }

    pub fn new(eps: f64, half_width: f64, shape: StripShape) -> Result<Self> {
        if !(eps > 0.0 && eps < 0.25) {
            return Err(Error::InvalidGeometry(format!("strip gap {eps} outside (0, 0.25)")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidGeometry(format!("half width {half_width}")));
        }
        let d = Self { eps, half_width, shape };
        if let StripShape::Parabolic { curvature } = shape {
            if !(curvature > 0.0) {
                return Err(Error::InvalidGeometry(format!("curvature {curvature} must be positive")));
            }
            // Second difference of h1 - h2 at the origin.
            let s = 1e-3;
            let gap = |x: f64| d.h1(x) - d.h2(x);
            if !((gap(s) - 2.0 * gap(0.0) + gap(-s)) / (s * s) > 0.0) {
                return Err(Error::InvalidGeometry("h1 - h2 is not convex at 0".into()));
            }
        }
        Ok(d)
    }

    pub fn h1(&self, x: f64) -> f64 {
        match self.shape {
            StripShape::Flat => 0.0,
            StripShape::Parabolic { curvature } => 0.5 * curvature * x * x,
        }
    }

    pub fn h2(&self, x: f64) -> f64 {
        -self.h1(x)
    }

    fn dh2(&self, x: f64) -> f64 {
        match self.shape {
            StripShape::Flat => 0.0,
            StripShape::Parabolic { curvature } => -curvature * x,
        }
    }

    /// Local thickness `ε + h1 - h2`.
    pub fn thickness(&self, x: f64) -> f64 {
        self.eps + self.h1(x) - self.h2(x)
    }

    fn dthickness(&self, x: f64) -> f64 {
        match self.shape {
            StripShape::Flat => 0.0,
            StripShape::Parabolic { curvature } => 2.0 * curvature * x,
        }
    }

    /// Physical point of the flattened coordinates `(x', t)`.
    pub fn physical(&self, x: f64, t: f64) -> (f64, f64) {
        (x, self.h2(x) - 0.5 * self.eps + t * self.thickness(x))
    }

    /// `(δ, τ)` at `(x', t)`.
    fn metric(&self, x: f64, t: f64) -> (f64, f64) {
        let d = self.thickness(x);
        (d, -(self.dh2(x) + t * self.dthickness(x)) / d)
    }
}

/// Data on the lateral sides `|x'| = W`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LateralData {
    Constant(f64),
    /// `u = t x'`, odd in `x'` and vanishing on the bottom.
    OddLinear,
    /// `u = sin(π t / 2)`, the lowest mode compatible with the top and
    /// bottom conditions.
    FirstMode,
}

impl LateralData {
    fn eval(&self, x: f64, t: f64) -> f64 {
        match *self {
            LateralData::Constant(c) => c,
            LateralData::OddLinear => t * x,
            LateralData::FirstMode => (0.5 * std::f64::consts::PI * t).sin(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripData {
    /// Value on the bottom graph.
    pub bottom: f64,
    pub lateral: LateralData,
}

impl StripData {
    pub fn grounded_odd() -> Self {
        Self { bottom: 0.0, lateral: LateralData::OddLinear }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StripGrid {
    /// Cells across `x'`.
    pub nx: usize,
    /// Cells across the thickness.
    pub ny: usize,
}

impl Default for StripGrid {
    fn default() -> Self {
        Self { nx: 1600, ny: 32 }
    }
}

/// Nodal values on the flattened lattice, node `(i, j)` at
/// `x' = -W + i hx`, `t = j ht`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripSolution {
    pub domain: StripDomain,
    pub data: StripData,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
    /// Max-norm of `K u - f` over free nodes, relative to `max |f|` (or `1`).
    pub residual: f64,
}

const GAUSS: [f64; 2] = [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8];

fn node(ny: usize, i: usize, j: usize) -> usize {
    i * (ny + 1) + j
}

pub fn solve_strip(d: &StripDomain, grid: StripGrid, data: StripData) -> Result<StripSolution> {
    let StripGrid { nx, ny } = grid;
    if nx < 2 || ny < 1 {
        return Err(Error::Config(format!("strip grid {nx}×{ny} too small")));
    }
    let w = d.half_width;
    let hx = 2.0 * w / nx as f64;
    let ht = 1.0 / ny as f64;
    let n = (nx + 1) * (ny + 1);
    let mut k = BandMatrix::zeros(n, ny + 2);

    for i in 0..nx {
        for j in 0..ny {
            let ids = [node(ny, i, j), node(ny, i + 1, j), node(ny, i, j + 1), node(ny, i + 1, j + 1)];
            let mut ke = [[0.0; 4]; 4];
            for gx in GAUSS {
                for gt in GAUSS {
                    let (sx, st) = (0.5 * (1.0 + gx), 0.5 * (1.0 + gt));
                    let x = -w + (i as f64 + sx) * hx;
                    let t = (j as f64 + st) * ht;
                    let (delta, tau) = d.metric(x, t);
                    let b = [delta, delta * tau, delta * tau * tau + 1.0 / delta];
                    let grads = shape_grads(sx, st, hx, ht);
                    let wq = 0.25 * hx * ht;
                    for a in 0..4 {
                        for c in 0..4 {
                            let (ga, gc) = (grads[a], grads[c]);
                            ke[a][c] += wq * (b[0] * ga.0 * gc.0 + b[1] * (ga.0 * gc.1 + ga.1 * gc.0) + b[2] * ga.1 * gc.1);
                        }
                    }
                }
            }
            for a in 0..4 {
                for c in 0..=a {
                    if ids[a] >= ids[c] {
                        k.add(ids[a], ids[c], ke[a][c]);
                    } else {
                        k.add(ids[c], ids[a], ke[a][c]);
                    }
                }
            }
        }
    }

    let mut fixed = vec![None; n];
    for i in 0..=nx {
        fixed[node(ny, i, 0)] = Some(data.bottom);
    }
    for j in 1..=ny {
        let t = j as f64 * ht;
        fixed[node(ny, 0, j)] = Some(data.lateral.eval(-w, t));
        fixed[node(ny, nx, j)] = Some(data.lateral.eval(w, t));
    }

    let stiffness = k.clone();
    let mut rhs = vec![0.0; n];
    for (r, slot) in rhs.iter_mut().enumerate() {
        if fixed[r].is_some() {
            continue;
        }
        let lo = r.saturating_sub(k.w);
        let hi = (r + k.w).min(n - 1);
        for c in lo..=hi {
            if let Some(g) = fixed[c] {
                *slot -= k.get(r, c) * g;
            }
        }
    }
    for (r, f) in fixed.iter().enumerate() {
        if let Some(g) = *f {
            k.set_identity_row(r);
            rhs[r] = g;
        }
    }
    let values = k.cholesky()?.solve(&rhs);

    let ku = stiffness.mul(&values);
    let mut res: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for r in 0..n {
        if fixed[r].is_none() {
            res = res.max(ku[r].abs());
        }
        scale = scale.max(stiffness.get(r, r) * values[r].abs());
    }
    Ok(StripSolution { domain: *d, data, nx, ny, values, residual: res / scale.max(f64::MIN_POSITIVE) })
}

/// Gradients of the four bilinear shape functions at local `(sx, st) ∈ [0,1]²`.
fn shape_grads(sx: f64, st: f64, hx: f64, ht: f64) -> [(f64, f64); 4] {
    [
        (-(1.0 - st) / hx, -(1.0 - sx) / ht),
        ((1.0 - st) / hx, -sx / ht),
        (-st / hx, (1.0 - sx) / ht),
        (st / hx, sx / ht),
    ]
}

impl StripSolution {
    fn hx(&self) -> f64 {
        2.0 * self.domain.half_width / self.nx as f64
    }

    fn ht(&self) -> f64 {
        1.0 / self.ny as f64
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[node(self.ny, i, j)]
    }

    pub fn x_coord(&self, i: usize) -> f64 {
        -self.domain.half_width + i as f64 * self.hx()
    }

    /// Value and physical gradient in cell `(i, j)` at local `(sx, st)`.
    fn cell_eval(&self, i: usize, j: usize, sx: f64, st: f64) -> (f64, [f64; 2]) {
        let u = [self.at(i, j), self.at(i + 1, j), self.at(i, j + 1), self.at(i + 1, j + 1)];
        let shapes = [(1.0 - sx) * (1.0 - st), sx * (1.0 - st), (1.0 - sx) * st, sx * st];
        let grads = shape_grads(sx, st, self.hx(), self.ht());
        let mut val = 0.0;
        let (mut ux, mut ut) = (0.0, 0.0);
        for a in 0..4 {
            val += shapes[a] * u[a];
            ux += grads[a].0 * u[a];
            ut += grads[a].1 * u[a];
        }
        let x = self.x_coord(i) + sx * self.hx();
        let t = (j as f64 + st) * self.ht();
        let (delta, tau) = self.domain.metric(x, t);
        (val, [ux + tau * ut, ut / delta])
    }

    /// `max_t |Du|` at the centre of each cell column, as `(x', value)`.
    pub fn column_gradients(&self) -> Vec<(f64, f64)> {
        (0..self.nx)
            .map(|i| {
                let x = self.x_coord(i) + 0.5 * self.hx();
                let m = (0..self.ny).fold(0.0f64, |m, j| {
                    let (_, g) = self.cell_eval(i, j, 0.5, 0.5);
                    m.max(g[0].hypot(g[1]))
                });
                (x, m)
            })
            .collect()
    }

    /// `(∫_{|x'|<r} |Du|², ∫_{|x'|<r} u²)` over the physical region.
    pub fn energies(&self, r: f64) -> (f64, f64) {
        let (hx, ht) = (self.hx(), self.ht());
        let (mut grad, mut mass) = (0.0, 0.0);
        for i in 0..self.nx {
            let xl = self.x_coord(i);
            let (a, b) = (xl.max(-r), (xl + hx).min(r));
            if b <= a {
                continue;
            }
            for j in 0..self.ny {
                for gx in GAUSS {
                    let x = 0.5 * (a + b) + 0.5 * (b - a) * gx;
                    let sx = (x - xl) / hx;
                    for gt in GAUSS {
                        let st = 0.5 * (1.0 + gt);
                        let (u, g) = self.cell_eval(i, j, sx, st);
                        let jac = 0.25 * (b - a) * ht * self.domain.thickness(x);
                        grad += jac * (g[0] * g[0] + g[1] * g[1]);
                        mass += jac * u * u;
                    }
                }
            }
        }
        (grad, mass)
    }

    /// Writes `x,y,u,a` rows at the physical node positions.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "u", "a"])?;
        for i in 0..=self.nx {
            for j in 0..=self.ny {
                let (x, y) = self.domain.physical(self.x_coord(i), j as f64 * self.ht());
                w.write_record(&[x.to_string(), y.to_string(), self.at(i, j).to_string(), "1".to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Least-squares line `log max|Du| ≈ intercept + slope / (√ε + |x'|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
    /// False when the gradient is negligible or does not fall toward `x' = 0`.
    pub decays: bool,
}

/// Fits the column gradients with `lo <= |x'| <= hi`.
pub fn decay_fit(sol: &StripSolution, lo: f64, hi: f64) -> DecayFit {
    let se = sol.domain.eps.sqrt();
    let cols = sol.column_gradients();
    let peak = cols.iter().fold(0.0f64, |m, c| m.max(c.1));
    let u_max = sol.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let pts: Vec<(f64, f64)> = cols
        .iter()
        .filter(|(x, g)| (lo..=hi).contains(&x.abs()) && *g > 0.0)
        .map(|&(x, g)| (1.0 / (se + x.abs()), g.ln()))
        .collect();
    let rejected = DecayFit { slope: 0.0, intercept: 0.0, r_squared: 0.0, points: pts.len(), decays: false };
    if pts.len() < 3 || peak <= 1e-10 * (1.0 + u_max) {
        return rejected;
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return rejected;
    }
    let slope = sxy / sxx;
    let r_squared = sxy * sxy / (sxx * syy);
    DecayFit { slope, intercept: my - slope * mx, r_squared, points: pts.len(), decays: slope < 0.0 }
}

/// One step `(s, t)` of the energy iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaccioppoliPair {
    pub r: f64,
    pub s: f64,
    pub t: f64,
    /// `∫_{Ω_t} |Du|²`.
    pub inner: f64,
    /// `∫_{Ω_s \ Ω_t} |Du|²`.
    pub annulus: f64,
    /// `inner / (((ε + s²)/(s - t))² annulus)`.
    pub c0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaccioppoliReport {
    pub pairs: Vec<CaccioppoliPair>,
    /// `(r, ∫_{Ω_{r/2}} |Du|² / ∫_{Ω_1} u²)`.
    pub energy_ratios: Vec<(f64, f64)>,
    pub c0_min: f64,
    pub c0_max: f64,
}

impl CaccioppoliReport {
    pub fn c0_spread(&self) -> f64 {
        self.c0_max / self.c0_min
    }

    pub fn energy_ratio(&self, r: f64) -> Option<f64> {
        self.energy_ratios.iter().find(|e| (e.0 - r).abs() < 1e-12).map(|e| e.1)
    }
}

pub const DEFAULT_RADII: [f64; 4] = [0.4, 0.3, 0.2, 0.15];

/// Evaluates the energy iteration on the ladder `t_0 = r`, `t_j = (1 - j r) r`
/// for each starting radius `r ∈ (√ε, 1/2)`. Meant for a grounded bottom.
pub fn caccioppoli_check(sol: &StripSolution, radii: &[f64]) -> CaccioppoliReport {
    let eps = sol.domain.eps;
    let (_, total_mass) = sol.energies(sol.domain.half_width.min(1.0));
    let mut pairs = Vec::new();
    let mut energy_ratios = Vec::new();
    for &r in radii {
        if !(r > eps.sqrt() && r < 0.5) {
            continue;
        }
        let k = (1.0 / (2.0 * r)).floor() as usize;
        for j in 0..k {
            let s = (1.0 - j as f64 * r) * r;
            let t = (1.0 - (j + 1) as f64 * r) * r;
            let inner = sol.energies(t).0;
            let annulus = sol.energies(s).0 - inner;
            let factor = ((eps + s * s) / (s - t)).powi(2);
            pairs.push(CaccioppoliPair { r, s, t, inner, annulus, c0: inner / (factor * annulus) });
        }
        energy_ratios.push((r, sol.energies(0.5 * r).0 / total_mass));
    }
    let c0_min = pairs.iter().fold(f64::INFINITY, |m, p| m.min(p.c0));
    let c0_max = pairs.iter().fold(0.0f64, |m, p| m.max(p.c0));
    CaccioppoliReport { pairs, energy_ratios, c0_min, c0_max }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn flat_constant_data_gives_constant_solution() {
        let d = StripDomain::flat(0.01).unwrap();
        let data = StripData { bottom: 0.7, lateral: LateralData::Constant(0.7) };
        let sol = solve_strip(&d, StripGrid { nx: 200, ny: 8 }, data).unwrap();
        assert!(sol.values.iter().all(|v| (v - 0.7).abs() < 1e-8));
        assert!(sol.column_gradients().iter().all(|c| c.1 < 1e-8));
        assert!(!decay_fit(&sol, 0.1, 0.5).decays);
    }

    // Flat strip with the first mode on the sides:
    // u = sin(π t/2) cosh(k x')/cosh(k W), k = π/(2ε).
    #[test]
    fn flat_first_mode_matches_separable_solution() {
        let eps = 0.2;
        let d = StripDomain::flat(eps).unwrap();
        let data = StripData { bottom: 0.0, lateral: LateralData::FirstMode };
        let kk = PI / (2.0 * eps);
        let exact = |x: f64, t: f64| (0.5 * PI * t).sin() * (kk * x).cosh() / kk.cosh();
        let mut errs = Vec::new();
        for n in [1, 2] {
            let sol = solve_strip(&d, StripGrid { nx: 200 * n, ny: 8 * n }, data).unwrap();
            let mut e: f64 = 0.0;
            for i in 0..=sol.nx {
                for j in 0..=sol.ny {
                    e = e.max((sol.at(i, j) - exact(sol.x_coord(i), j as f64 / sol.ny as f64)).abs());
                }
            }
            errs.push(e);
            if n == 2 {
                let r = 0.5;
                let closed = kk * eps / (2.0 * kk.cosh().powi(2)) * (2.0 * kk * r).sinh();
                let (grad, _) = sol.energies(r);
                assert!((grad / closed - 1.0).abs() < 1e-2, "{grad} vs {closed}");
                let mass = eps / (2.0 * kk.cosh().powi(2)) * (1.0 + (2.0 * kk).sinh() / (2.0 * kk));
                assert!((sol.energies(1.0).1 / mass - 1.0).abs() < 1e-2);
                let rep = caccioppoli_check(&sol, &[0.45]);
                assert!(rep.c0_min.is_finite() && rep.c0_min > 0.0);
            }
        }
        assert!(errs[1] < 1e-3, "{errs:?}");
        assert!(errs[0] / errs[1] > 3.0, "{errs:?}");
    }

    #[test]
    fn parabolic_gradient_decays_toward_the_centre() {
        let d = StripDomain::parabolic(0.01).unwrap();
        let sol = solve_strip(&d, StripGrid { nx: 800, ny: 24 }, StripData::grounded_odd()).unwrap();
        assert!(sol.residual < 1e-10);
        let cols: Vec<(f64, f64)> = sol.column_gradients().into_iter().filter(|c| c.0 >= 0.1 && c.0 <= 0.4).collect();
        for w in cols.windows(2) {
            assert!(w[1].1 > w[0].1, "{:?}", w);
        }
        let fit = decay_fit(&sol, 0.1, 0.5);
        assert!(fit.decays && fit.r_squared > 0.9, "{fit:?}");
    }

    #[test]
    fn energy_ratio_drops_when_radius_halves() {
        let d = StripDomain::parabolic(1e-3).unwrap();
        let sol = solve_strip(&d, StripGrid::default(), StripData::grounded_odd()).unwrap();
        let rep = caccioppoli_check(&sol, &DEFAULT_RADII);
        let (e4, e2) = (rep.energy_ratio(0.4).unwrap(), rep.energy_ratio(0.2).unwrap());
        assert!(e2 * 2.0 <= e4, "{e4} {e2}");
    }

    #[test]
    fn rejects_bad_domains() {
        assert!(StripDomain::parabolic(0.3).is_err());
        assert!(StripDomain::new(0.01, 1.0, StripShape::Parabolic { curvature: -1.0 }).is_err());
    }

    #[test]
    fn boundary_data_is_reproduced() {
        let d = StripDomain::parabolic(0.01).unwrap();
        let sol = solve_strip(&d, StripGrid { nx: 100, ny: 8 }, StripData::grounded_odd()).unwrap();
        for i in 0..=sol.nx {
            assert_eq!(sol.at(i, 0), 0.0);
        }
        for j in 0..=sol.ny {
            let t = j as f64 / 8.0;
            assert_eq!(sol.at(sol.nx, j), t);
            assert_eq!(sol.at(0, j), -t);
        }
    }
}
