//! Measured `|D^m u|` against the earlier ε-dependent envelope
//! `(c(k1, k2) + √(2 (r1 + r2) ε / (r1 r2)))^{1 - m}` with
//! `c(k1, k2) = -(k1 + 1)(k2 + 1) / ((k1 - 1)(k2 - 1)) - 1`.

use serde::{Deserialize, Serialize};

use super::config::Config;
use super::sweep::{max_over_probes, run_sweep, SweepRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JikangRecord {
    pub eps: f64,
    pub k1: f64,
    pub k2: f64,
    pub gamma: f64,
    pub m: u32,
    /// Max over probes.
    pub deriv_abs: Option<f64>,
    pub jikang_envelope: Option<f64>,
    pub ratio_to_envelope: Option<f64>,
    /// `deriv_abs` divided by its value at the largest eps of the sweep.
    pub ratio_to_constant: Option<f64>,
    pub error: Option<String>,
}

/// `c(k1, k2)`; `None` when either conductivity equals the background.
pub fn envelope_constant(k1: f64, k2: f64) -> Option<f64> {
    if k1 == 1.0 || k2 == 1.0 {
        return None;
    }
    Some(-(k1 + 1.0) * (k2 + 1.0) / ((k1 - 1.0) * (k2 - 1.0)) - 1.0)
}

/// The envelope for order `m`, or `None` when its base is not positive.
pub fn jikang_envelope(k1: f64, k2: f64, r1: f64, r2: f64, eps: f64, m: u32) -> Option<f64> {
    let base = envelope_constant(k1, k2)? + (2.0 * (r1 + r2) * eps / (r1 * r2)).sqrt();
    (base > 0.0).then(|| base.powi(1 - m as i32))
}

pub fn run_jikang(cfg: &Config) -> Vec<JikangRecord> {
    jikang_from_sweep(cfg, &run_sweep(cfg))
}

pub fn jikang_from_sweep(cfg: &Config, sweep: &[SweepRecord]) -> Vec<JikangRecord> {
    let sw = &cfg.sweep;
    let mut out = Vec::new();
    for &eps in &sw.eps {
        for regime in &sw.regimes {
            for &m in &sw.orders {
                let (k1, k2) = (regime.k1, regime.k2);
                let cell: Vec<&SweepRecord> =
                    sweep.iter().filter(|r| r.eps == eps && r.k1 == k1 && r.k2 == k2 && r.m == m).collect();
                let gamma = cell.first().map_or(f64::NAN, |r| r.gamma);
                let deriv_abs = max_over_probes(sweep, eps, k1, k2, m);
                let reference = max_over_probes(sweep, sw.eps[0], k1, k2, m);
                let envelope = jikang_envelope(k1, k2, sw.r1, sw.r2, eps, m);
                let error = if deriv_abs.is_none() {
                    Some(cell.iter().find_map(|r| r.error.clone()).unwrap_or_else(|| "no records".into()))
                } else if envelope.is_none() {
                    Some("envelope undefined for these conductivities".into())
                } else {
                    None
                };
                out.push(JikangRecord {
                    eps,
                    k1,
                    k2,
                    gamma,
                    m,
                    deriv_abs,
                    jikang_envelope: envelope,
                    ratio_to_envelope: deriv_abs.zip(envelope).map(|(d, e)| d / e),
                    ratio_to_constant: deriv_abs.zip(reference).map(|(d, r)| d / r),
                    error,
                });
            }
        }
    }
    out
}
