//! Self-checks exposed as subcommands: Green's function properties, a single
//! FD solve, and the conformal reduction on random geometries.

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Config, DirichletSource};
use crate::conformal::build_reduction;
use crate::error::{Error, Result};
use crate::fd::{solve_transmission, BoundaryData, Grid, GridSolution};
use crate::geometry::{fit_circle, Geometry};
use crate::green::{interface_check, laplacian_residual};
use crate::potential::{u_rep, SourceData};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenCheckRecord {
    pub eps: f64,
    pub k1: f64,
    pub k2: f64,
    pub source_x: f64,
    pub source_y: f64,
    pub points: Option<usize>,
    pub value_jump: Option<f64>,
    pub flux_jump: Option<f64>,
    /// Largest `|a Δ_h G|` over points away from the source and the interfaces.
    pub laplacian_residual: Option<f64>,
    pub error: Option<String>,
}

/// Points inside each disk and far out in the matrix, at distance at least
/// `0.4` from both interfaces.
pub fn harmonic_probes(g: &Geometry) -> [C; 4] {
    [g.c1 + C::new(0.0, 0.5), g.c2 + C::new(0.1, -0.5), C::new(0.0, 3.0), C::new(-3.5, 0.0)]
}

pub fn run_green_check(cfg: &Config) -> Vec<GreenCheckRecord> {
    let gc = &cfg.green_check;
    let p = cfg.green_params();
    let cells: Vec<(f64, (f64, f64), [f64; 2])> = gc
        .eps
        .iter()
        .flat_map(|&e| gc.regimes.iter().flat_map(move |r| gc.sources.iter().map(move |&s| (e, (r.k1, r.k2), s))))
        .collect();
    cells
        .par_iter()
        .map(|&(eps, (k1, k2), y)| {
            let mut rec = GreenCheckRecord {
                eps,
                k1,
                k2,
                source_x: y[0],
                source_y: y[1],
                points: None,
                value_jump: None,
                flux_jump: None,
                laplacian_residual: None,
                error: None,
            };
            let mut run = || -> Result<()> {
                let g = Geometry::unit(eps)?;
                let c = crate::green::Conductivity::new(k1, k2)?;
                let y = C::new(y[0], y[1]);
                let rep = interface_check(y, &c, &g, &p, gc.points, gc.h)?;
                rec.points = Some(rep.points);
                rec.value_jump = Some(rep.value_jump);
                rec.flux_jump = Some(rep.flux_jump);
                let mut lap: f64 = 0.0;
                for x in harmonic_probes(&g) {
                    if (x - y).norm() > 0.1 {
                        lap = lap.max(laplacian_residual(x, y, &c, &g, &p, gc.laplacian_h)?.abs());
                    }
                }
                rec.laplacian_residual = Some(lap);
                Ok(())
            };
            if let Err(e) = run() {
                rec.error = Some(e.to_string());
            }
            rec
        })
        .collect()
}

/// Solves the transmission problem described by `[fd]`.
pub fn run_fd_solve(cfg: &Config) -> Result<GridSolution> {
    let f = &cfg.fd;
    let g = Geometry::unit(f.eps)?;
    let c = crate::green::Conductivity::new(f.k1, f.k2)?;
    let h = f.eps * f.h_over_eps;
    let half = (f.half / h).round() * h;
    let grid = Grid::for_geometry(C::new(0.0, 0.0), half, h, &c, &g)?;
    let s = cfg.source.build()?;
    let (p, q) = (cfg.green_params(), cfg.quadrature());
    let values: Vec<f64> = match f.dirichlet {
        DirichletSource::Zero => vec![0.0; grid.boundary_nodes().len()],
        DirichletSource::Representation => grid
            .boundary_nodes()
            .par_iter()
            .map(|&(i, j)| u_rep(grid.node(i, j), &s, &c, &g, &p, &q).map(|v| v.value))
            .collect::<Result<_>>()?,
    };
    let interior = if f.with_source { s } else { SourceData::zero() };
    solve_transmission(&grid, BoundaryData::Values(&values), &interior)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalRecord {
    pub r1: f64,
    pub r2: f64,
    pub eps: f64,
    pub z0: Option<f64>,
    /// `z0 - (eps/2 + 4 min(r1, r2))`.
    pub pole_margin: Option<f64>,
    pub radius_mismatch: Option<f64>,
    /// Largest `|N⁻¹(N(z)) - z| / (1 + |z|)` over the test points.
    pub round_trip: Option<f64>,
    /// Largest deviation of the fitted image circles from the unit pair.
    pub circle_residual: Option<f64>,
    pub gap_ratio: Option<f64>,
    pub error: Option<String>,
}

/// Random `(r1, r2, eps)` from the configured box, reproducible from the seed.
pub fn conformal_samples(cfg: &Config) -> Vec<(f64, f64, f64)> {
    let cc = &cfg.conformal;
    let mut rng = ChaCha8Rng::seed_from_u64(cc.seed);
    (0..cc.samples)
        .map(|_| {
            let r1 = rng.gen_range(cc.r_range[0]..cc.r_range[1]);
            let r2 = rng.gen_range(cc.r_range[0]..cc.r_range[1]);
            let eps = rng.gen_range(cc.eps_range[0]..cc.eps_range[1]);
            (r1, r2, eps)
        })
        .collect()
}

pub fn conformal_record(r1: f64, r2: f64, eps: f64) -> ConformalRecord {
    let mut rec = ConformalRecord {
        r1,
        r2,
        eps,
        z0: None,
        pole_margin: None,
        radius_mismatch: None,
        round_trip: None,
        circle_residual: None,
        gap_ratio: None,
        error: None,
    };
    let run = |rec: &mut ConformalRecord| -> Result<()> {
        let g = Geometry::new(eps, r1, r2)?;
        let red = build_reduction(&g)?;
        let z0 = red.pole().ok_or(Error::EqualRadii)?.re.abs();
        rec.z0 = Some(z0);
        rec.pole_margin = Some(z0 - (eps / 2.0 + 4.0 * r1.min(r2)));
        rec.radius_mismatch = Some(red.radius_mismatch());
        rec.gap_ratio = Some(red.gap_ratio());
        let mut round: f64 = 0.0;
        let mut circle: f64 = 0.0;
        for disk in [1u8, 2] {
            let pts: Vec<C> = (0..64)
                .map(|k| g.center(disk) + g.radius(disk) * C::from_polar(1.0, std::f64::consts::TAU * k as f64 / 64.0))
                .collect();
            for &z in &pts {
                round = round.max((red.inverse(red.forward(z)) - z).norm() / (1.0 + z.norm()));
            }
            let images: Vec<C> = pts.iter().map(|&z| red.forward(z)).collect();
            let fit = fit_circle(&images).ok_or_else(|| Error::Config("circle fit failed".into()))?;
            circle = circle
                .max(fit.max_residual)
                .max((fit.radius - 1.0).abs())
                .max((fit.center - red.mapped.center(disk)).norm());
        }
        rec.round_trip = Some(round);
        rec.circle_residual = Some(circle);
        Ok(())
    };
    if let Err(e) = run(&mut rec) {
        rec.error = Some(e.to_string());
    }
    rec
}

pub fn run_conformal_check(cfg: &Config) -> Vec<ConformalRecord> {
    conformal_samples(cfg).into_iter().map(|(r1, r2, eps)| conformal_record(r1, r2, eps)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conformal_samples_are_reproducible_and_pass() {
        let cfg = Config::default();
        assert_eq!(conformal_samples(&cfg), conformal_samples(&cfg));
        for r in run_conformal_check(&cfg) {
            assert!(r.error.is_none(), "{r:?}");
            assert!(r.radius_mismatch.unwrap() < 1e-12 && r.pole_margin.unwrap() > 0.0, "{r:?}");
            assert!(r.round_trip.unwrap() < 1e-13 && r.circle_residual.unwrap() < 1e-9, "{r:?}");
        }
    }

    #[test]
    fn fd_solve_with_zero_data_is_zero() {
        let mut cfg = Config::default();
        cfg.fd.dirichlet = DirichletSource::Zero;
        cfg.fd.eps = 0.2;
        let sol = run_fd_solve(&cfg).unwrap();
        assert!(sol.values.iter().all(|v| *v == 0.0));
    }
}
