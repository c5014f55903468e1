use fracplast::scenario::Overrides;
use fracplast::{load_scenario, sweep};
use fracplast_core::sweep::FlowSample;

fn samples(preset: &str, alpha: f64, n: usize) -> Vec<FlowSample> {
    let s = load_scenario(preset, &Overrides { alpha: Some(alpha), steps: Some(1), ..Default::default() }).unwrap();
    sweep(&s, n).unwrap()
}

/// Point on the yield curve `|dev σ| = Y0` in the σ11–σ22 plane along direction θ.
fn curve_point(theta: f64, dim: usize, y0: f64) -> [f64; 2] {
    let (c, s) = (theta.cos(), theta.sin());
    let mean = (c + s) / dim as f64;
    let mut dev2 = (c - mean).powi(2) + (s - mean).powi(2);
    if dim == 3 {
        dev2 += mean * mean;
    }
    let r = y0 / dev2.sqrt();
    [r * c, r * s]
}

#[test]
fn classical_direction_is_normal_to_the_sampled_curve() {
    for (preset, dim, y0) in [("notched2d", 2, 10000.0), ("box3d", 3, 50000.0)] {
        for s in samples(preset, 0.5, 64) {
            let h = 1e-6;
            let (a, b) = (curve_point(s.theta - h, dim, y0), curve_point(s.theta + h, dim, y0));
            let tangent = [(b[0] - a[0]) / (2.0 * h), (b[1] - a[1]) / (2.0 * h)];
            let t_norm = tangent[0].hypot(tangent[1]);
            let n_norm = s.classical[0].hypot(s.classical[1]);
            let cos = (tangent[0] * s.classical[0] + tangent[1] * s.classical[1]) / (t_norm * n_norm);
            assert!(cos.abs() < 1e-6, "{preset} θ={}: cos {cos:e}", s.theta);
            let p = curve_point(s.theta, dim, y0);
            assert!((p[0] - s.sigma[0]).abs() <= 1e-9 * y0 && (p[1] - s.sigma[1]).abs() <= 1e-9 * y0);
            // Outward: with σ33 = 0 the in-plane product n : σ equals |dev σ|.
            let outward = s.classical[0] * s.sigma[0] + s.classical[1] * s.sigma[1];
            assert!((outward - y0).abs() <= 1e-9 * y0, "{preset} θ={}: {outward}", s.theta);
        }
    }
}

#[test]
fn fractional_direction_stays_within_ninety_degrees() {
    for preset in ["notched2d", "box3d"] {
        for alpha in [0.1, 0.5, 0.9] {
            for s in samples(preset, alpha, 72) {
                assert!(s.projected_inner() > 0.0, "{preset} α={alpha} θ={}", s.theta);
                assert!(s.angle < std::f64::consts::FRAC_PI_2);
            }
        }
    }
}

#[test]
fn larger_order_deviates_less_from_the_classical_flow() {
    let max_angle = |v: &[FlowSample]| v.iter().map(|s| s.angle).fold(0.0, f64::max);
    for preset in ["notched2d", "box3d"] {
        let low = max_angle(&samples(preset, 0.5, 72));
        let high = max_angle(&samples(preset, 0.99, 72));
        assert!(high <= low, "{preset}: {high} > {low}");
        assert!(high < 0.1 * low.max(1e-12) || high < 1e-2, "{preset}: {high} vs {low}");
    }
}
