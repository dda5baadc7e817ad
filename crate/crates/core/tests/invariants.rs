//! Estimator-level invariants over the catalog.

use microyoung::extension::scaling_degree;
use microyoung::product::holder_value;
use microyoung::regularity::estimate_beta_star;
use microyoung::{
    check_young_classical, check_young_microlocal, critical_sobolev_direction,
    estimate_holder_exponent, parse_kernel, product_germ, reconstruct_product_germ,
    verify_reconstruction_bound, DistributionExpr, Region,
};

const P_GRID: [f64; 4] = [2.0, 4.0, 8.0, f64::INFINITY];

fn k(id: &str) -> DistributionExpr {
    parse_kernel(id, 1).unwrap()
}

fn unit() -> Region {
    Region::cube(1, -0.5, 0.5)
}

#[test]
fn beta_star_dominates_holder_for_negative_kernels() {
    for id in [
        "delta@0",
        "delta@0:1",
        "powerlaw@0:-0.5",
        "powerlaw@0:-0.75",
    ] {
        let u = k(id);
        let a = estimate_holder_exponent(&u, &unit()).unwrap().value;
        let b = estimate_beta_star(&u, &unit(), &P_GRID).unwrap().value;
        assert!(b >= a - 0.1, "{id}: beta* {b} < alpha {a}");
    }
}

#[test]
fn scaling_degree_bounds_holder() {
    for id in [
        "delta@0",
        "delta@0:1",
        "powerlaw@0:-0.5",
        "powerlaw@0:-0.75",
        "cusp@0:0.6",
    ] {
        let u = k(id);
        let a = holder_value(&estimate_holder_exponent(&u, &unit()).unwrap());
        let sd = scaling_degree(&u, &[0.0, 0.0]).unwrap().value;
        assert!(a >= -sd - 0.1, "{id}: alpha {a} vs sd {sd}");
    }
}

#[test]
fn classical_implies_microlocal() {
    for (f, g) in [
        ("cusp@0:0.6", "powerlaw@0:-0.5"),
        ("cusp@0:0.6", "cusp@0:0.6"),
        ("constant-1", "delta@0"),
    ] {
        let (f, g) = (k(f), k(g));
        let a = holder_value(&estimate_holder_exponent(&f, &unit()).unwrap());
        let b = holder_value(&estimate_holder_exponent(&g, &unit()).unwrap());
        let (a, b) = if a >= b { (a, b) } else { (b, a) };
        if check_young_classical(a, b).admissible && a + b > 0.1 {
            let m = check_young_microlocal(&f, &g).unwrap();
            assert!(
                m.decision.is_admissible(),
                "{} * {}: {:?}",
                f.label(),
                g.label(),
                m.decision
            );
        }
    }
}

#[test]
fn wavefront_directions_are_symmetric() {
    for id in ["delta@0", "powerlaw@0:-0.5", "cusp@0:0.6"] {
        let u = k(id);
        let plus = critical_sobolev_direction(&u, &[0.0, 0.0], &[1.0, 0.0]).unwrap();
        let minus = critical_sobolev_direction(&u, &[0.0, 0.0], &[-1.0, 0.0]).unwrap();
        assert!((plus - minus).abs() <= 0.05, "{id}: {plus} vs {minus}");
    }
}

#[test]
fn wavefront_is_local() {
    for id in ["delta@0", "powerlaw@0:-0.5"] {
        let u = k(id);
        for dir in [[1.0, 0.0], [-1.0, 0.0]] {
            let s = critical_sobolev_direction(&u, &[0.5, 0.0], &dir).unwrap();
            assert_eq!(s, f64::INFINITY, "{id}");
        }
    }
}

#[test]
fn perturbed_reconstruction_is_rejected() {
    let germ = product_germ(&k("cusp@0:0.8"), &k("powerlaw@0:-0.4")).unwrap();
    let rf = reconstruct_product_germ(&germ).unwrap();
    let region = Region::cube(1, -0.5, 0.5);
    let good = verify_reconstruction_bound(&germ, &rf, &region).unwrap();
    assert!(good.pass, "slope {}", good.slope);
    let bad = DistributionExpr::sum(vec![(1.0, rf), (0.5, k("cusp@0:0.1"))]).unwrap();
    let report = verify_reconstruction_bound(&germ, &bad, &region).unwrap();
    assert!(!report.pass, "perturbed slope {}", report.slope);
    assert!(
        (report.slope - 0.1).abs() < 0.1,
        "perturbed slope {}",
        report.slope
    );
}

#[test]
fn closed_forms_without_singular_points_are_smooth() {
    for id in ["bump@0:0.5", "cos:3", "constant-1"] {
        let r = estimate_holder_exponent(&k(id), &unit()).unwrap();
        assert!(r.smooth, "{id}: {}", r.value);
    }
    assert!(
        !estimate_holder_exponent(&k("cusp@0:1"), &unit())
            .unwrap()
            .smooth
    );
}
