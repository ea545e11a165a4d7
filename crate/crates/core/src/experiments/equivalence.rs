//! Field representation against the finite-difference transmission solver.
//!
//! The FD problem lives on a square around the gap, with Dirichlet data taken
//! from the representation itself, and is solved on two nested grids. The
//! grid-convergence estimate is the largest change between the two grids at
//! the probes; the representation passes when, after removing the best
//! constant, it deviates from the fine solution by at most a fixed multiple of
//! that estimate.

use num_complex::Complex64 as C;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fd::{solve_transmission, BoundaryData, Grid};
use crate::geometry::Geometry;
use crate::green::{Conductivity, GreenParams};
use crate::potential::{u_rep, SourceData};
use crate::quadrature::Quadrature;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceSetup {
    pub eps: f64,
    pub k1: f64,
    pub k2: f64,
    /// Half side of the square centred at the origin.
    pub half: f64,
    /// Coarse spacing is `eps / coarse_divisor`; the fine grid halves it.
    pub coarse_divisor: f64,
    /// Accepted deviation in units of the grid-convergence estimate.
    pub margin: f64,
    pub params: GreenParams,
    pub quadrature: Quadrature,
    pub source_center: C,
    pub source_sigma: f64,
}

impl EquivalenceSetup {
    pub fn new(eps: f64, k1: f64, k2: f64) -> Self {
        Self {
            eps,
            k1,
            k2,
            half: 0.5,
            coarse_divisor: 8.0,
            margin: 5.0,
            params: GreenParams { tol: 1e-10, ..GreenParams::default() },
            quadrature: Quadrature::new(32, 32),
            source_center: super::DEFAULT_SOURCE_CENTER,
            source_sigma: super::DEFAULT_SOURCE_SIGMA,
        }
    }

    /// 5×5 probes at `-0.8 half, -0.4 half, ..., 0.8 half` per coordinate.
    pub fn probes(&self) -> Vec<C> {
        let t = |k: usize| self.half * (-0.8 + 0.4 * k as f64);
        (0..5).flat_map(|j| (0..5).map(move |i| C::new(t(i), t(j)))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub eps: f64,
    pub k1: f64,
    pub k2: f64,
    pub h_coarse: f64,
    pub h_fine: f64,
    /// `mean(u_rep - u_fine)` over the probes.
    pub constant: f64,
    /// `max |u_rep - u_fine - constant|`.
    pub max_deviation: f64,
    /// `max |u_fine - u_coarse|`.
    pub convergence_estimate: f64,
    pub cg_iterations: usize,
    pub passed: bool,
}

pub fn representation_vs_fd(setup: &EquivalenceSetup) -> Result<EquivalenceReport> {
    let g = Geometry::unit(setup.eps)?;
    let c = Conductivity::new(setup.k1, setup.k2)?;
    let s = SourceData::gaussian_dipole(setup.source_center, setup.source_sigma)?;
    let (p, q) = (setup.params, setup.quadrature);
    let h_coarse = setup.eps / setup.coarse_divisor;
    let coarse = Grid::for_geometry(C::new(0.0, 0.0), setup.half, h_coarse, &c, &g)?;
    let fine = Grid::for_geometry(C::new(0.0, 0.0), setup.half, h_coarse / 2.0, &c, &g)?;

    let fine_nodes = fine.boundary_nodes();
    let fine_vals: Vec<f64> = fine_nodes
        .par_iter()
        .map(|&(i, j)| u_rep(fine.node(i, j), &s, &c, &g, &p, &q).map(|v| v.value))
        .collect::<Result<_>>()?;
    let mut dense = vec![f64::NAN; (fine.nx + 1) * (fine.ny + 1)];
    for (&(i, j), v) in fine_nodes.iter().zip(&fine_vals) {
        dense[fine.index(i, j)] = *v;
    }
    let coarse_vals: Vec<f64> = coarse.boundary_nodes().iter().map(|&(i, j)| dense[fine.index(2 * i, 2 * j)]).collect();

    let zero = SourceData::zero();
    let (sol_c, sol_f) = rayon::join(
        || solve_transmission(&coarse, BoundaryData::Values(&coarse_vals), &zero),
        || solve_transmission(&fine, BoundaryData::Values(&fine_vals), &zero),
    );
    let (sol_c, sol_f) = (sol_c?, sol_f?);

    let probes = setup.probes();
    let rep: Vec<f64> = probes.par_iter().map(|&x| u_rep(x, &s, &c, &g, &p, &q).map(|v| v.value)).collect::<Result<_>>()?;
    let at = |sol: &crate::fd::GridSolution, x: C| sol.sample(x).expect("probe inside the square");
    let diffs: Vec<f64> = probes.iter().zip(&rep).map(|(&x, r)| r - at(&sol_f, x)).collect();
    let constant = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let max_deviation = diffs.iter().map(|d| (d - constant).abs()).fold(0.0, f64::max);
    let convergence_estimate = probes.iter().map(|&x| (at(&sol_f, x) - at(&sol_c, x)).abs()).fold(0.0, f64::max);
    Ok(EquivalenceReport {
        eps: setup.eps,
        k1: setup.k1,
        k2: setup.k2,
        h_coarse,
        h_fine: h_coarse / 2.0,
        constant,
        max_deviation,
        convergence_estimate,
        cg_iterations: sol_f.iterations,
        passed: max_deviation <= setup.margin * convergence_estimate,
    })
}
