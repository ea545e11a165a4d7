use gapfield::geometry::Geometry;
use gapfield::green::{green, interface_check, laplacian_residual, Conductivity, GreenParams};
use num_complex::Complex64 as C;

fn sources(g: &Geometry) -> [C; 3] {
    [C::new(0.3, 0.9), g.c1 + C::new(0.3, 0.4), g.c2 + C::new(-0.2, 0.5)]
}

#[test]
fn continuity_and_flux_for_every_source_region() {
    let p = GreenParams::default();
    for eps in [0.1, 0.01] {
        let g = Geometry::unit(eps).unwrap();
        for (k1, k2) in [(0.1, 10.0), (100.0, 100.0), (3.0, 0.2)] {
            let c = Conductivity::new(k1, k2).unwrap();
            for y in sources(&g) {
                let r = interface_check(y, &c, &g, &p, 32, 1e-4).unwrap();
                assert!(r.value_jump < 1e-6, "eps {eps} k ({k1},{k2}) y {y}: {r:?}");
                assert!(r.flux_jump < 1e-3, "eps {eps} k ({k1},{k2}) y {y}: {r:?}");
            }
        }
    }
}

#[test]
fn harmonic_away_from_source_and_interfaces() {
    let p = GreenParams::default();
    let g = Geometry::unit(0.05).unwrap();
    let c = Conductivity::new(0.1, 10.0).unwrap();
    let probes = [g.c1 + C::new(0.0, 0.5), g.c2 + C::new(0.1, -0.5), C::new(0.0, 3.0), C::new(-3.5, 0.0)];
    for y in sources(&g) {
        for x in probes {
            let r = laplacian_residual(x, y, &c, &g, &p, 1e-3).unwrap();
            assert!(r.abs() < 1e-4, "x {x} y {y}: {r}");
        }
    }
}

#[test]
fn doubling_the_series_length_is_invisible() {
    let g = Geometry::unit(0.01).unwrap();
    let c = Conductivity::new(0.1, 10.0).unwrap();
    let loose = GreenParams { tol: 1e-10, ..GreenParams::default() };
    let tight = GreenParams { tol: 1e-14, ..GreenParams::default() };
    for i in 0..100 {
        let t = i as f64 * 0.0628;
        let x = C::new(2.5 * t.cos(), 1.7 * t.sin());
        let y = C::new(0.2, 0.8);
        if (x - y).norm() < 1e-3 {
            continue;
        }
        let a = green(x, y, &c, &g, &loose).unwrap();
        let b = green(x, y, &c, &g, &tight).unwrap();
        assert!((a.value - b.value).abs() < 1e-10, "{x}: {}", (a.value - b.value).abs());
    }
}
