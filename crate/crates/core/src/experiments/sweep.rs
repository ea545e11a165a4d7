//! ε-sweeps of `|D^m u|` near the gap centre.

use std::time::{Duration, Instant};

use num_complex::Complex64 as C;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Config, Regime};
use crate::error::Result;
use crate::fd::{solve_transmission, BoundaryData, Grid};
use crate::geometry::Geometry;
use crate::potential::{u_rep, u_rep_jet, SourceData};

/// One `(eps, regime, m, probe)` cell of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub eps: f64,
    pub k1: f64,
    pub k2: f64,
    pub gamma: f64,
    pub m: u32,
    pub probe_x: f64,
    pub probe_y: f64,
    /// `max_j |∂1^{m-j} ∂2^j u|`.
    pub deriv_abs: Option<f64>,
    pub series_k: Option<usize>,
    pub tail_est: Option<f64>,
    /// `|∇u - ∇_h u_FD|` for `m = 1` when the oracle ran.
    pub oracle_dev: Option<f64>,
    pub error: Option<String>,
    #[serde(skip)]
    pub wall_time: Duration,
}

struct ProbeTask {
    eps: f64,
    regime: Regime,
    probe: C,
}

type ProbeResult = (Vec<Result<(f64, usize, f64)>>, Duration);

pub fn run_sweep(cfg: &Config) -> Vec<SweepRecord> {
    let sw = &cfg.sweep;
    let tasks: Vec<ProbeTask> = sw
        .eps
        .iter()
        .flat_map(|&eps| {
            sw.regimes
                .iter()
                .flat_map(move |&regime| sw.probe_points(eps).into_iter().map(move |probe| ProbeTask { eps, regime, probe }))
        })
        .collect();
    let results: Vec<ProbeResult> = tasks.par_iter().map(|t| evaluate_probe(cfg, t)).collect();

    let oracle_eps: Vec<f64> = if sw.oracle { sw.eps.iter().take(2).copied().collect() } else { vec![] };
    let oracle_cells: Vec<(f64, Regime)> =
        oracle_eps.iter().flat_map(|&eps| sw.regimes.iter().map(move |&r| (eps, r))).collect();
    let oracles: Vec<Result<Vec<f64>>> = oracle_cells.par_iter().map(|&(eps, r)| gradient_oracle(cfg, eps, r)).collect();

    let mut records = Vec::with_capacity(tasks.len() * sw.orders.len());
    let n_probe = |eps: f64| sw.probe_points(eps).len();
    let mut cursor = 0;
    for &eps in &sw.eps {
        for &regime in &sw.regimes {
            let n = n_probe(eps);
            let cell = &results[cursor..cursor + n];
            let oracle = oracle_cells.iter().position(|&(e, r)| e == eps && r == regime).map(|i| &oracles[i]);
            let gamma = crate::green::Conductivity::new(regime.k1, regime.k2).map(|c| c.gamma).unwrap_or(f64::NAN);
            for (oi, &m) in sw.orders.iter().enumerate() {
                for (pi, (per_order, time)) in cell.iter().enumerate() {
                    let probe = tasks[cursor + pi].probe;
                    let mut rec = SweepRecord {
                        eps,
                        k1: regime.k1,
                        k2: regime.k2,
                        gamma,
                        m,
                        probe_x: probe.re,
                        probe_y: probe.im,
                        deriv_abs: None,
                        series_k: None,
                        tail_est: None,
                        oracle_dev: None,
                        error: None,
                        wall_time: *time,
                    };
                    match &per_order[oi] {
                        Ok((d, k, tail)) => {
                            rec.deriv_abs = Some(*d);
                            rec.series_k = Some(*k);
                            rec.tail_est = Some(*tail);
                        }
                        Err(e) => rec.error = Some(e.to_string()),
                    }
                    if m == 1 {
                        match oracle {
                            Some(Ok(devs)) => rec.oracle_dev = Some(devs[pi]),
                            Some(Err(e)) if rec.error.is_none() => rec.error = Some(format!("oracle: {e}")),
                            _ => {}
                        }
                    }
                    records.push(rec);
                }
            }
            cursor += n;
        }
    }
    records
}

fn evaluate_probe(cfg: &Config, t: &ProbeTask) -> ProbeResult {
    let start = Instant::now();
    let setup = || -> Result<(Geometry, crate::green::Conductivity, SourceData)> {
        Ok((Geometry::new(t.eps, cfg.sweep.r1, cfg.sweep.r2)?, t.regime.conductivity()?, cfg.source.build()?))
    };
    let out = match setup() {
        Ok((g, c, s)) => {
            let (p, q) = (cfg.green_params(), cfg.quadrature());
            cfg.sweep
                .orders
                .iter()
                .map(|&m| u_rep_jet(t.probe, &s, &c, &g, &p, &q, m).map(|j| (j.max_abs(), j.k_used, j.series_err_est)))
                .collect()
        }
        Err(e) => {
            let msg = e.to_string();
            cfg.sweep.orders.iter().map(|_| Err(crate::error::Error::Config(msg.clone()))).collect()
        }
    };
    (out, start.elapsed())
}

/// FD gradient check at the probes: Dirichlet data from the representation on
/// a square of half side about `0.25`, spacing `eps / 8`, central differences.
fn gradient_oracle(cfg: &Config, eps: f64, regime: Regime) -> Result<Vec<f64>> {
    let g = Geometry::new(eps, cfg.sweep.r1, cfg.sweep.r2)?;
    let c = regime.conductivity()?;
    let s = cfg.source.build()?;
    let (p, q) = (cfg.green_params(), cfg.quadrature());
    let h = eps / 8.0;
    let half = (0.25 / h).ceil() * h;
    let grid = Grid::for_geometry(C::new(0.0, 0.0), half, h, &c, &g)?;
    let values: Vec<f64> = grid
        .boundary_nodes()
        .iter()
        .map(|&(i, j)| u_rep(grid.node(i, j), &s, &c, &g, &p, &q).map(|v| v.value))
        .collect::<Result<_>>()?;
    let sol = solve_transmission(&grid, BoundaryData::Values(&values), &s)?;
    let at = |z: C| sol.sample(z).unwrap_or(f64::NAN);
    cfg.sweep
        .probe_points(eps)
        .iter()
        .map(|&x| {
            let fd = [(at(x + h) - at(x - h)) / (2.0 * h), (at(x + C::new(0.0, h)) - at(x - C::new(0.0, h))) / (2.0 * h)];
            let jet = u_rep_jet(x, &s, &c, &g, &p, &q, 1)?;
            Ok((jet.partials[0] - fd[0]).hypot(jet.partials[1] - fd[1]))
        })
        .collect()
}

/// `max over probes` of `deriv_abs` for one `(eps, k1, k2, m)`.
pub fn max_over_probes(records: &[SweepRecord], eps: f64, k1: f64, k2: f64, m: u32) -> Option<f64> {
    let cell: Vec<&SweepRecord> = records.iter().filter(|r| r.eps == eps && r.k1 == k1 && r.k2 == k2 && r.m == m).collect();
    if cell.is_empty() || cell.iter().any(|r| r.deriv_abs.is_none()) {
        return None;
    }
    Some(cell.iter().filter_map(|r| r.deriv_abs).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::{Regime, RegimeLabel};

    fn small_config() -> Config {
        let mut cfg = Config::default();
        cfg.sweep.eps = vec![0.1, 0.05];
        cfg.sweep.orders = vec![1, 2];
        cfg.sweep.regimes = vec![Regime::new(RegimeLabel::Reference, 1.0, 1.0), Regime::new(RegimeLabel::Theorem, 0.1, 10.0)];
        cfg.quadrature.n_radial = 16;
        cfg.quadrature.n_angular = 16;
        cfg.quadrature.tol = 1e-4;
        cfg
    }

    #[test]
    fn one_record_per_cell_in_order() {
        let cfg = small_config();
        let recs = run_sweep(&cfg);
        assert_eq!(recs.len(), 2 * 2 * 2 * 9);
        assert!(recs.iter().all(|r| r.error.is_none()), "{:?}", recs.iter().find(|r| r.error.is_some()));
        assert_eq!((recs[0].eps, recs[0].k1, recs[0].m), (0.1, 1.0, 1));
        assert_eq!(recs[9].m, 2);
        assert_eq!(recs[18].k1, 0.1);
    }

    #[test]
    fn reference_regime_is_geometry_independent() {
        // With k1 = k2 = 1 the field is the free-space potential, so the
        // value at a fixed point cannot depend on eps.
        let mut cfg = small_config();
        cfg.sweep.regimes = vec![Regime::new(RegimeLabel::Reference, 1.0, 1.0)];
        cfg.sweep.probes = Some(vec![[0.0, 0.0], [0.01, -0.02]]);
        let recs = run_sweep(&cfg);
        for m in [1, 2] {
            let a = max_over_probes(&recs, 0.1, 1.0, 1.0, m).unwrap();
            let b = max_over_probes(&recs, 0.05, 1.0, 1.0, m).unwrap();
            assert!((a - b).abs() <= 1e-9 * a.max(1e-12), "m {m}: {a} {b}");
        }
    }

    #[test]
    fn failing_cells_are_recorded_not_fatal() {
        let mut cfg = small_config();
        cfg.sweep.regimes = vec![Regime::new(RegimeLabel::Reference, 1.0, 1.0)];
        // A probe inside the source support: second derivatives are rejected there.
        cfg.sweep.probes = Some(vec![[1.05, 1.6], [0.0, 0.0]]);
        let recs = run_sweep(&cfg);
        let bad: Vec<_> = recs.iter().filter(|r| r.error.is_some()).collect();
        assert!(!bad.is_empty());
        assert!(recs.iter().any(|r| r.error.is_none() && r.deriv_abs.is_some()));
    }
}
