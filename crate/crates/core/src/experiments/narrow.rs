//! Gradient decay in the thin strip.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{NarrowConfig, ShapeName};
use crate::error::Result;
use crate::fd::{caccioppoli_check, decay_fit, solve_strip, StripData, StripDomain, StripGrid, StripShape, StripSolution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NarrowRecord {
    pub eps: f64,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r_squared: Option<f64>,
    /// Whether the fit detected decay toward `x' = 0`.
    pub decay: Option<bool>,
    /// `ln(max|Du| at |x'| = hi) - ln(max|Du| at |x'| = lo)` over the fit window.
    pub log_drop: Option<f64>,
    pub c0_min: Option<f64>,
    pub c0_max: Option<f64>,
    pub error: Option<String>,
}

impl NarrowRecord {
    fn failed(eps: f64, e: String) -> Self {
        Self {
            eps,
            slope: None,
            intercept: None,
            r_squared: None,
            decay: None,
            log_drop: None,
            c0_min: None,
            c0_max: None,
            error: Some(e),
        }
    }
}

pub fn strip_domain(cfg: &NarrowConfig, eps: f64) -> Result<StripDomain> {
    let shape = match cfg.shape {
        ShapeName::Flat => StripShape::Flat,
        ShapeName::Parabolic => StripShape::Parabolic { curvature: cfg.curvature },
    };
    StripDomain::new(eps, cfg.half_width, shape)
}

pub fn solve_cell(cfg: &NarrowConfig, eps: f64) -> Result<StripSolution> {
    let d = strip_domain(cfg, eps)?;
    solve_strip(&d, StripGrid { nx: cfg.nx, ny: cfg.ny }, StripData { bottom: cfg.bottom, lateral: cfg.lateral })
}

/// Column gradient closest to `|x'| = x` on the positive side.
fn gradient_near(sol: &StripSolution, x: f64) -> Option<f64> {
    sol.column_gradients()
        .into_iter()
        .filter(|c| c.0 > 0.0)
        .min_by(|a, b| (a.0 - x).abs().total_cmp(&(b.0 - x).abs()))
        .map(|c| c.1)
}

fn record(cfg: &NarrowConfig, eps: f64) -> NarrowRecord {
    let sol = match solve_cell(cfg, eps) {
        Ok(s) => s,
        Err(e) => return NarrowRecord::failed(eps, e.to_string()),
    };
    let [lo, hi] = cfg.fit_range;
    let fit = decay_fit(&sol, lo, hi);
    let cac = caccioppoli_check(&sol, &cfg.radii);
    let log_drop = gradient_near(&sol, hi).zip(gradient_near(&sol, lo)).and_then(|(a, b)| (a > 0.0 && b > 0.0).then(|| a.ln() - b.ln()));
    let (c0_min, c0_max) = if cac.pairs.is_empty() { (None, None) } else { (Some(cac.c0_min), Some(cac.c0_max)) };
    NarrowRecord {
        eps,
        slope: fit.decays.then_some(fit.slope),
        intercept: fit.decays.then_some(fit.intercept),
        r_squared: fit.decays.then_some(fit.r_squared),
        decay: Some(fit.decays),
        log_drop,
        c0_min,
        c0_max,
        error: (!fit.decays).then(|| "no decay".to_string()),
    }
}

pub fn run_narrow(cfg: &NarrowConfig) -> Vec<NarrowRecord> {
    cfg.eps.par_iter().map(|&eps| record(cfg, eps)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fd::LateralData;

    fn coarse(shape: ShapeName) -> NarrowConfig {
        NarrowConfig { shape, nx: 800, ny: 24, ..NarrowConfig::default() }
    }

    #[test]
    fn flat_strip_is_flagged_as_not_decaying() {
        let cfg = NarrowConfig { lateral: LateralData::Constant(0.5), bottom: 0.5, eps: vec![0.01], ..coarse(ShapeName::Flat) };
        let rec = &run_narrow(&cfg)[0];
        assert_eq!(rec.decay, Some(false));
        assert_eq!(rec.error.as_deref(), Some("no decay"));
        assert!(rec.slope.is_none());
    }

    #[test]
    fn parabolic_strip_decays_and_steepens_as_the_gap_closes() {
        let recs = run_narrow(&coarse(ShapeName::Parabolic));
        for r in &recs {
            assert_eq!(r.decay, Some(true), "{r:?}");
            assert!(r.slope.unwrap() < 0.0);
            assert!(r.r_squared.unwrap() >= 0.95, "{r:?}");
        }
        for w in recs.windows(2) {
            assert!(w[1].log_drop.unwrap() > w[0].log_drop.unwrap(), "{w:?}");
        }
    }
}
