//! Conservative five-point finite differences for `div(a ∇u) = div(f1, f2) + f3`
//! on a rectangle with Dirichlet data.
//!
//! The coefficient is sampled at the nodes, each node being the centre of its
//! dual cell, and the flux through a cell face uses the harmonic mean of the
//! two adjacent node values.

use std::io::Write;

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use super::cg::{pcg, Csr};
use crate::error::{Error, Result};
use crate::geometry::{classify_region, Geometry};
use crate::green::Conductivity;
use crate::potential::SourceData;

/// Node lattice `origin + h (i + i j)`, `0 <= i <= nx`, `0 <= j <= ny`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub origin: C,
    /// Coefficient at each node, row-major in `j`.
    pub coeff: Vec<f64>,
    /// Gap width the grid has to resolve, if any.
    pub gap: Option<f64>,
}

impl Grid {
    pub fn new(origin: C, h: f64, nx: usize, ny: usize, coeff: impl Fn(C) -> f64) -> Self {
        let mut values = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                values.push(coeff(origin + C::new(i as f64 * h, j as f64 * h)));
            }
        }
        Self { nx, ny, h, origin, coeff: values, gap: None }
    }

    /// Square `[cx - half, cx + half] × [cy - half, cy + half]` with the
    /// piecewise-constant coefficient of the two-disk geometry.
    pub fn for_geometry(center: C, half: f64, h: f64, c: &Conductivity, g: &Geometry) -> Result<Self> {
        let n = (2.0 * half / h).round() as usize;
        if n < 2 || ((n as f64) * h - 2.0 * half).abs() > 1e-9 * half {
            return Err(Error::Config(format!("spacing {h} does not divide the side {}", 2.0 * half)));
        }
        let origin = center - C::new(half, half);
        let mut grid = Self::new(origin, h, n, n, |z| c.on(classify_region(z, g, 0.0).side()));
        grid.gap = Some(g.eps);
        Ok(grid)
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    pub fn node(&self, i: usize, j: usize) -> C {
        self.origin + C::new(i as f64 * self.h, j as f64 * self.h)
    }

    fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.nx || j == self.ny
    }

    /// Boundary node indices `(i, j)` in a fixed order (row-major).
    pub fn boundary_nodes(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for j in 0..=self.ny {
            for i in 0..=self.nx {
                if self.is_boundary(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    fn face(&self, a: usize, b: usize) -> f64 {
        let (ka, kb) = (self.coeff[a], self.coeff[b]);
        2.0 * ka * kb / (ka + kb)
    }
}

/// Dirichlet data either as a function or as values in
/// [`Grid::boundary_nodes`] order.
pub enum BoundaryData<'a> {
    Function(&'a dyn Fn(C) -> f64),
    Values(&'a [f64]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryKind {
    /// Dirichlet on the whole boundary.
    Dirichlet,
    /// Dirichlet bottom and sides, natural Neumann top.
    DirichletNeumann,
}

/// Nodal solution on a rectangular lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSolution {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub origin: C,
    pub values: Vec<f64>,
    pub coeff: Vec<f64>,
    pub boundary: BoundaryKind,
    pub residual: f64,
    pub iterations: usize,
}

impl GridSolution {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * (self.nx + 1) + i]
    }

    /// Bilinear interpolation; `None` outside the lattice.
    pub fn sample(&self, z: C) -> Option<f64> {
        let s = (z - self.origin) / self.h;
        if s.re < 0.0 || s.im < 0.0 || s.re > self.nx as f64 || s.im > self.ny as f64 {
            return None;
        }
        let i = (s.re.floor() as usize).min(self.nx - 1);
        let j = (s.im.floor() as usize).min(self.ny - 1);
        let (fx, fy) = (s.re - i as f64, s.im - j as f64);
        Some(
            (1.0 - fx) * (1.0 - fy) * self.at(i, j)
                + fx * (1.0 - fy) * self.at(i + 1, j)
                + (1.0 - fx) * fy * self.at(i, j + 1)
                + fx * fy * self.at(i + 1, j + 1),
        )
    }

    /// Writes `x,y,u,a` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "u", "a"])?;
        for j in 0..=self.ny {
            for i in 0..=self.nx {
                let z = self.origin + C::new(i as f64 * self.h, j as f64 * self.h);
                let k = j * (self.nx + 1) + i;
                w.write_record(&[z.re.to_string(), z.im.to_string(), self.values[k].to_string(), self.coeff[k].to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Relative residual target of the linear solve.
pub const SOLVER_TOL: f64 = 1e-10;

pub fn solve_transmission(grid: &Grid, dirichlet: BoundaryData<'_>, source: &SourceData) -> Result<GridSolution> {
    if let Some(eps) = grid.gap {
        if grid.h > eps / 8.0 * (1.0 + 1e-12) {
            return Err(Error::GapUnderresolved { h: grid.h, limit: eps / 8.0 });
        }
    }
    let (nx, ny, h) = (grid.nx, grid.ny, grid.h);
    let mut values = vec![0.0; (nx + 1) * (ny + 1)];
    let boundary = grid.boundary_nodes();
    if let BoundaryData::Values(v) = &dirichlet {
        if v.len() != boundary.len() {
            return Err(Error::Config(format!("{} boundary values for {} boundary nodes", v.len(), boundary.len())));
        }
    }
    for (n, &(i, j)) in boundary.iter().enumerate() {
        values[grid.index(i, j)] = match &dirichlet {
            BoundaryData::Function(f) => f(grid.node(i, j)),
            BoundaryData::Values(v) => v[n],
        };
    }

    let unknown = |i: usize, j: usize| (j - 1) * (nx - 1) + (i - 1);
    let n_unknown = (nx - 1) * (ny - 1);
    let mut rows = Vec::with_capacity(n_unknown);
    let mut rhs = vec![0.0; n_unknown];
    let half = h / 2.0;
    for j in 1..ny {
        for i in 1..nx {
            let p = grid.index(i, j);
            let z = grid.node(i, j);
            let mut row = Vec::with_capacity(5);
            let mut diag = 0.0;
            let mut b = -h * h * (source.f3)(z)
                - h * ((source.f1)(z + half) - (source.f1)(z - half))
                - h * ((source.f2)(z + C::new(0.0, half)) - (source.f2)(z - C::new(0.0, half)));
            for (ni, nj) in [(i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)] {
                let q = grid.index(ni, nj);
                let af = grid.face(p, q);
                diag += af;
                if grid.is_boundary(ni, nj) {
                    b += af * values[q];
                } else {
                    row.push((unknown(ni, nj), -af));
                }
            }
            row.push((unknown(i, j), diag));
            rows.push(row);
            rhs[unknown(i, j)] = b;
        }
    }
    let a = Csr::from_rows(rows);
    let mut x = vec![0.0; n_unknown];
    let stats = pcg(&a, &rhs, &mut x, SOLVER_TOL, 20 * n_unknown + 1000)?;
    for j in 1..ny {
        for i in 1..nx {
            values[grid.index(i, j)] = x[unknown(i, j)];
        }
    }
    Ok(GridSolution {
        nx,
        ny,
        h,
        origin: grid.origin,
        values,
        coeff: grid.coeff.clone(),
        boundary: BoundaryKind::Dirichlet,
        residual: stats.relative_residual,
        iterations: stats.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn laplace_grid(n: usize) -> Grid {
        Grid::new(C::new(-0.5, -0.5), 1.0 / n as f64, n, n, |_| 1.0)
    }

    fn max_error(sol: &GridSolution, f: impl Fn(C) -> f64) -> f64 {
        let mut e: f64 = 0.0;
        for j in 0..=sol.ny {
            for i in 0..=sol.nx {
                let z = sol.origin + C::new(i as f64 * sol.h, j as f64 * sol.h);
                e = e.max((sol.at(i, j) - f(z)).abs());
            }
        }
        e
    }

    #[test]
    fn reproduces_quadratic_harmonic_polynomial() {
        let f = |z: C| z.re * z.re - z.im * z.im;
        let sol = solve_transmission(&laplace_grid(20), BoundaryData::Function(&f), &SourceData::zero()).unwrap();
        assert!(max_error(&sol, f) < 1e-9);
        assert!(sol.residual <= SOLVER_TOL);
    }

    #[test]
    fn second_order_for_smooth_harmonic_data() {
        let f = |z: C| z.re.exp() * z.im.cos();
        let errs: Vec<f64> = [8, 16, 32]
            .iter()
            .map(|&n| max_error(&solve_transmission(&laplace_grid(n), BoundaryData::Function(&f), &SourceData::zero()).unwrap(), f))
            .collect();
        for w in errs.windows(2) {
            let slope = (w[0] / w[1]).log2();
            assert!(slope >= 1.8, "{errs:?}");
        }
    }

    #[test]
    fn poisson_source_sign() {
        // u = x² + y² solves Δu = 4, i.e. f3 = 4.
        let f = |z: C| z.norm_sqr();
        let s = SourceData::scalar(Arc::new(|_| 4.0), vec![]).unwrap();
        let sol = solve_transmission(&laplace_grid(16), BoundaryData::Function(&f), &s).unwrap();
        assert!(max_error(&sol, f) < 1e-9);
    }

    #[test]
    fn divergence_source_sign() {
        // u = x² solves Δu = ∂1 f1 with f1 = 2x.
        let f = |z: C| z.re * z.re;
        let zero: crate::potential::Field = Arc::new(|_| 0.0);
        let s = SourceData::new(Arc::new(|z: C| 2.0 * z.re), zero.clone(), zero, vec![]).unwrap();
        let sol = solve_transmission(&laplace_grid(16), BoundaryData::Function(&f), &s).unwrap();
        assert!(max_error(&sol, f) < 1e-9);
    }

    #[test]
    fn unit_conductivity_grid_is_laplace() {
        let g = Geometry::unit(0.1).unwrap();
        let c = Conductivity::new(1.0, 1.0).unwrap();
        let grid = Grid::for_geometry(C::new(0.0, 0.0), 0.5, 0.0125, &c, &g).unwrap();
        assert!(grid.coeff.iter().all(|&a| a == 1.0));
    }

    #[test]
    fn underresolved_gap_is_rejected() {
        let g = Geometry::unit(0.1).unwrap();
        let c = Conductivity::new(0.1, 10.0).unwrap();
        let grid = Grid::for_geometry(C::new(0.0, 0.0), 0.5, 0.025, &c, &g).unwrap();
        let f = |_: C| 0.0;
        let r = solve_transmission(&grid, BoundaryData::Function(&f), &SourceData::zero());
        assert!(matches!(r, Err(Error::GapUnderresolved { .. })));
    }

    #[test]
    fn discrete_flux_balance_on_a_contour() {
        let g = Geometry::unit(0.1).unwrap();
        let c = Conductivity::new(0.1, 10.0).unwrap();
        let grid = Grid::for_geometry(C::new(0.0, 0.0), 0.5, 0.0125, &c, &g).unwrap();
        let f = |z: C| z.re + 0.3 * z.im;
        let sol = solve_transmission(&grid, BoundaryData::Function(&f), &SourceData::zero()).unwrap();
        // Outward flux through the boundary of the node block [10, 70]².
        let (lo, hi) = (10, 70);
        let flux = |a: (usize, usize), b: (usize, usize)| {
            let (pa, pb) = (grid.index(a.0, a.1), grid.index(b.0, b.1));
            grid.face(pa, pb) * (sol.values[pb] - sol.values[pa])
        };
        let mut total = 0.0;
        let mut scale: f64 = 0.0;
        for k in lo..=hi {
            for (a, b) in [((k, lo), (k, lo - 1)), ((k, hi), (k, hi + 1)), ((lo, k), (lo - 1, k)), ((hi, k), (hi + 1, k))] {
                let v = flux(a, b);
                total += v;
                scale = scale.max(v.abs());
            }
        }
        assert!(total.abs() < 1e-6 * scale, "{total} (scale {scale})");
    }

    #[test]
    fn csv_export_has_header_and_rows() {
        let f = |z: C| z.re;
        let sol = solve_transmission(&laplace_grid(4), BoundaryData::Function(&f), &SourceData::zero()).unwrap();
        let mut buf = Vec::new();
        sol.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,y,u,a\n"));
        assert_eq!(text.lines().count(), 1 + 25);
        assert_eq!(sol.sample(C::new(0.0, 0.1)).unwrap(), sol.sample(C::new(0.0, 0.1)).unwrap());
        assert!((sol.sample(C::new(0.1, 0.2)).unwrap() - 0.1).abs() < 1e-9);
    }
}
