//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//! Runs without the libtest harness so the lines are always printed.

use std::time::Instant;

use gapfield::experiments::config::{NarrowConfig, Regime, RegimeLabel};
use gapfield::experiments::equivalence::{representation_vs_fd, EquivalenceSetup};
use gapfield::experiments::{checks, jikang, narrow, output, sweep, Config};
use gapfield::geometry::{d_psi_pow, i_k, psi_iterate, psi_pow, to_transformed, Frame, Geometry};
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn green_suite() -> Outcome {
    let cfg = Config::default();
    let bound = (50.0 * cfg.series.tol).max(1e-3);
    let recs = checks::run_green_check(&cfg);
    let (mut value, mut flux, mut lap) = (0.0f64, 0.0f64, 0.0f64);
    let mut pass = recs.len() == 9;
    for r in &recs {
        match (r.value_jump, r.flux_jump, r.laplacian_residual, &r.error) {
            (Some(v), Some(f), Some(l), None) => {
                value = value.max(v);
                flux = flux.max(f);
                lap = lap.max(l);
                pass &= r.points == Some(2 * cfg.green_check.points) && v < bound && f < bound && l < 1e-4;
            }
            _ => pass = false,
        }
    }
    outcome(pass, format!("{} cases, value jump {value:.1e}, flux jump {flux:.1e} (< {bound:.0e}), a·Δ_h G {lap:.1e} (< 1e-4)", recs.len()))
}

/// Random points outside `B1` in `[-3, 3]²`; iterates of those stay away from
/// the poles of `psi^k`.
fn outside_b1(g: &Geometry, n: usize, rng: &mut ChaCha8Rng) -> Vec<C> {
    let mut pts = Vec::with_capacity(n);
    while pts.len() < n {
        let x = C::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        if (x - g.c1).norm() > g.r1 + 1e-6 {
            pts.push(x);
        }
    }
    pts
}

fn closed_form_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst_pow, mut worst_d) = (0.0f64, 0.0f64);
    for eps in [1e-1, 1e-2, 1e-3] {
        let g = Geometry::unit(eps).unwrap();
        for x in outside_b1(&g, 500, &mut rng) {
            let mut iter = x;
            for k in 0..=50 {
                if k > 0 {
                    iter = psi_iterate(iter, 1, &g).unwrap();
                }
                let closed = psi_pow(x, k, &g, Frame::Original).unwrap();
                worst_pow = worst_pow.max((closed - iter).norm() / (1.0 + iter.norm()));
            }
            // Derivatives in the transformed frame: Richardson-extrapolated
            // central differences of the next lower order, step scaled to
            // the distance from the nearest pole. For larger k the iterate is
            // constant to within rounding and differences carry no digits.
            let w = to_transformed(x, &g);
            for k in [1usize, 2, 3, 5, 8] {
                let h = 1e-3 * i_k(w, 2 * k as i32, &g).norm().min(1.0);
                for alpha in 1..=3u32 {
                    let f = |z: C| d_psi_pow(z, k, alpha - 1, &g).unwrap();
                    let central = |h: f64| (f(w + h) - f(w - h)) / (2.0 * h);
                    let fd = (4.0 * central(h / 2.0) - central(h)) / 3.0;
                    let exact = d_psi_pow(w, k, alpha, &g).unwrap();
                    worst_d = worst_d.max((fd - exact).norm() / exact.norm());
                }
            }
        }
    }
    outcome(
        worst_pow < 1e-11 && worst_d < 1e-6,
        format!("psi_pow vs iteration {worst_pow:.1e} (< 1e-11), derivatives vs FD {worst_d:.1e} (< 1e-6)"),
    )
}

fn equivalence() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for eps in [0.1, 0.05] {
        match representation_vs_fd(&EquivalenceSetup::new(eps, 0.1, 10.0)) {
            Ok(r) => {
                pass &= r.passed;
                parts.push(format!("eps {eps}: dev {:.2e} vs estimate {:.2e}", r.max_deviation, r.convergence_estimate));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("eps {eps}: {e}"));
            }
        }
    }
    outcome(pass, format!("{} (bound 5× estimate)", parts.join(", ")))
}

fn sweep_config() -> Config {
    let mut cfg = Config::default();
    cfg.sweep.eps = vec![1e-1, 1e-2, 1e-3, 1e-4];
    cfg.sweep.orders = vec![1, 2, 3];
    cfg.sweep.regimes = vec![Regime::new(RegimeLabel::Theorem, 0.1, 10.0), Regime::new(RegimeLabel::BothLarge, 100.0, 100.0)];
    cfg.sweep.oracle = false;
    cfg
}

fn bounded_in_eps(cfg: &Config, recs: &[sweep::SweepRecord]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for m in [1, 2, 3] {
        let vals: Option<Vec<f64>> = cfg.sweep.eps.iter().map(|&e| sweep::max_over_probes(recs, e, 0.1, 10.0, m)).collect();
        match vals {
            Some(v) => {
                let ratio = v.iter().cloned().fold(0.0, f64::max) / v.iter().cloned().fold(f64::INFINITY, f64::min);
                pass &= ratio < 10.0;
                parts.push(format!("m{m} max/min {ratio:.2}"));
            }
            None => {
                pass = false;
                parts.push(format!("m{m} missing cells"));
            }
        }
    }
    outcome(pass, format!("{} (< 10)", parts.join(", ")))
}

fn blow_up_slope(cfg: &Config, recs: &[sweep::SweepRecord]) -> Outcome {
    let pts: Option<Vec<(f64, f64)>> = cfg
        .sweep
        .eps
        .iter()
        .map(|&e| sweep::max_over_probes(recs, e, 100.0, 100.0, 1).map(|d| (e.ln(), d.ln())))
        .collect();
    let Some(pts) = pts else {
        return outcome(false, "missing cells".into());
    };
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    outcome((-0.7..=-0.3).contains(&slope), format!("slope {slope:.3} in [-0.7, -0.3]"))
}

fn envelope_trend(cfg: &Config, recs: &[sweep::SweepRecord]) -> Outcome {
    let ratios: Vec<Option<f64>> = jikang::jikang_from_sweep(cfg, recs)
        .into_iter()
        .filter(|r| r.m == 2 && r.k1 == 0.1 && r.k2 == 10.0)
        .map(|r| r.ratio_to_envelope)
        .collect();
    let Some(ratios) = ratios.into_iter().collect::<Option<Vec<f64>>>() else {
        return outcome(false, "missing cells".into());
    };
    let pass = ratios.len() == cfg.sweep.eps.len() && ratios.windows(2).all(|w| w[1] <= 1.1 * w[0]);
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
    outcome(pass, format!("|D²u|/envelope over eps ↓: {}", shown.join(" → ")))
}

fn conformal() -> Outcome {
    let recs = checks::run_conformal_check(&Config::default());
    let (mut mismatch, mut round, mut margin) = (0.0f64, 0.0f64, f64::INFINITY);
    let mut pass = recs.len() == 20;
    for r in &recs {
        match (r.radius_mismatch, r.round_trip, r.pole_margin, &r.error) {
            (Some(m), Some(t), Some(p), None) => {
                mismatch = mismatch.max(m);
                round = round.max(t);
                margin = margin.min(p);
            }
            _ => pass = false,
        }
    }
    pass &= mismatch < 1e-12 && round < 1e-13 && margin > 0.0;
    outcome(pass, format!("{} samples, radius mismatch {mismatch:.1e}, round trip {round:.1e}, min pole margin {margin:.3}", recs.len()))
}

fn strip_decay() -> Outcome {
    let recs = narrow::run_narrow(&NarrowConfig::default());
    let mut pass = recs.len() == 3;
    let mut parts = Vec::new();
    for r in &recs {
        match (r.slope, r.r_squared, r.c0_min, r.c0_max) {
            (Some(s), Some(r2), Some(lo), Some(hi)) => {
                pass &= s < 0.0 && r2 >= 0.95 && hi / lo < 100.0;
                parts.push(format!("eps {}: slope {s:.2} R² {r2:.3} C0 spread {:.1}", r.eps, hi / lo));
            }
            _ => {
                pass = false;
                parts.push(format!("eps {}: {:?}", r.eps, r.error));
            }
        }
    }
    outcome(pass, parts.join("; "))
}

fn determinism() -> Outcome {
    let mut cfg = Config::default();
    cfg.sweep.eps = vec![0.1, 0.01];
    cfg.sweep.orders = vec![1, 2];
    cfg.quadrature.n_radial = 16;
    cfg.quadrature.n_angular = 16;
    let run = || {
        let mut buf = Vec::new();
        output::write_csv(&sweep::run_sweep(&cfg), &mut buf).unwrap();
        buf
    };
    let (a, b) = (run(), run());
    outcome(a == b && !a.is_empty(), format!("two runs, {} bytes each, identical: {}", a.len(), a == b))
}

fn main() {
    let mut failed = 0;
    let mut report = |n: u32, start: Instant, o: Outcome| {
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {n}: {verdict} [{:.1}s] {}", start.elapsed().as_secs_f64(), o.detail);
        if !o.pass {
            failed += 1;
        }
    };

    let t = Instant::now();
    report(1, t, green_suite());
    let t = Instant::now();
    report(2, t, closed_form_oracle());
    let t = Instant::now();
    report(3, t, equivalence());

    let t = Instant::now();
    let cfg = sweep_config();
    let recs = sweep::run_sweep(&cfg);
    println!("shared sweep for criteria 4-6: {} records in {:.1}s", recs.len(), t.elapsed().as_secs_f64());
    let t = Instant::now();
    report(4, t, bounded_in_eps(&cfg, &recs));
    report(5, t, blow_up_slope(&cfg, &recs));
    report(6, t, envelope_trend(&cfg, &recs));

    let t = Instant::now();
    report(7, t, conformal());
    let t = Instant::now();
    report(8, t, strip_decay());
    let t = Instant::now();
    report(9, t, determinism());

    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
