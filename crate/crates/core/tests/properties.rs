use microyoung::extension::extend;
use microyoung::testfn::cr_norms;
use microyoung::{
    estimate_holder_exponent, pair, pair_scaled, parse_kernel, DistributionExpr, DyadicPartition,
    Region, TestFunction,
};
use proptest::prelude::*;

fn kernel(id: &str, dim: usize) -> DistributionExpr {
    parse_kernel(id, dim).unwrap()
}

fn bump(c: f64, r: f64, s: f64) -> TestFunction {
    TestFunction::bump_at(1, [c, 0.0], r, s, 1.0)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-12)
}

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(cfg(24))]

    #[test]
    fn pairing_is_linear(
        id in prop::sample::select(vec!["delta@0", "delta@0:1", "powerlaw@0:-0.5", "cusp@0:0.6", "constant-1"]),
        a in -3.0..3.0f64, b in -3.0..3.0f64,
        c1 in -0.3..0.3f64, r1 in 0.2..0.7f64,
        c2 in -0.3..0.3f64, r2 in 0.2..0.7f64,
    ) {
        let u = kernel(id, 1);
        let (p, q) = (bump(c1, r1, 1.0), bump(c2, r2, 0.7));
        let lhs = pair(&u, &TestFunction::combination(vec![(a, p.clone()), (b, q.clone())])).unwrap();
        let rhs = a * pair(&u, &p).unwrap() + b * pair(&u, &q).unwrap();
        let scale = (a * pair(&u, &p).unwrap()).abs() + (b * pair(&u, &q).unwrap()).abs();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * scale.max(1e-12), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn power_law_is_homogeneous(a in -0.95..-0.05f64, n in 2i32..=10) {
        let u = DistributionExpr::power_law(1, [0.0, 0.0], a);
        let phi = bump(0.0, 1.0, 1.0);
        let base = pair(&u, &phi).unwrap();
        let lam = 2f64.powi(-n);
        let v = pair_scaled(&u, &phi, &[0.0, 0.0], lam).unwrap();
        prop_assert!(close(v, lam.powf(a) * base, 1e-8), "{} vs {}", v, lam.powf(a) * base);
    }

    #[test]
    fn scaling_preserves_mass(x in -0.5..0.5f64, n in 0i32..=10, r in 0.3..1.0f64) {
        let one = kernel("constant-1", 1);
        let phi = bump(0.0, r, 1.0);
        let lam = 2f64.powi(-n);
        let m = pair(&one, &phi).unwrap();
        prop_assert!(close(pair_scaled(&one, &phi, &[x, 0.0], lam).unwrap(), m, 1e-10));
        prop_assert!(close(pair(&one, &phi.scale_translate(lam, &[x, 0.0])).unwrap(), m, 1e-10));
    }

    #[test]
    fn delta_pairing_is_point_evaluation(x in -0.4..0.4f64, n in 0i32..=10) {
        let lam = 2f64.powi(-n);
        let phi = bump(0.0, 1.0, 1.0);
        let v = pair_scaled(&kernel("delta@0", 1), &phi, &[x, 0.0], lam).unwrap();
        prop_assert!(close(v, phi.value(&[-x / lam, 0.0]) / lam, 1e-12));
        let d = pair_scaled(&kernel("delta@0:1", 1), &phi, &[x, 0.0], lam).unwrap();
        let expected = -phi.partial(&[-x / lam, 0.0], [1, 0]).unwrap() / (lam * lam);
        prop_assert!(close(d, expected, 1e-12), "{} vs {}", d, expected);
    }

    #[test]
    fn derivative_sups_scale(n in 0i32..=6, x in -0.3..0.3f64) {
        let lam = 2f64.powi(-n);
        let phi = bump(0.0, 1.0, 1.0);
        let base = cr_norms(&phi, 2);
        let scaled = cr_norms(&phi.scale_translate(lam, &[x, 0.0]), 2);
        for k in 0..=2 {
            prop_assert!(close(scaled[k], lam.powi(-1 - k as i32) * base[k], 1e-9), "order {}: {} vs {}", k, scaled[k], base[k]);
        }
    }
}

proptest! {
    #![proptest_config(cfg(16))]

    #[test]
    fn partition_sums_to_one(idx in 0usize..4096) {
        let part = DyadicPartition::standard(1).unwrap();
        prop_assume!(part.grid.xi_norm(idx) <= part.resolved_band());
        prop_assert!((part.sum_at(idx) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn extension_members_differ_by_point_values(a0 in -5.0..5.0f64, c in -0.3..0.3f64, r in 0.5..0.9f64) {
        let u = kernel("powerlaw@0:-1", 1);
        let fam = extend(&u, &[0.0, 0.0], None).unwrap();
        let psi = bump(c, r, 1.0);
        let base = pair(&fam.base_member(), &psi).unwrap();
        let shifted = pair(&fam.member_with(&[([0, 0], a0)]), &psi).unwrap();
        prop_assert!(((shifted - base) - a0 * psi.value(&[0.0, 0.0])).abs() < 1e-10 * (1.0 + base.abs()));
    }

    #[test]
    fn extension_agrees_away_from_the_point(c in 0.4..0.6f64, r in 0.1..0.3f64) {
        let u = kernel("powerlaw@0:-1", 1);
        let fam = extend(&u, &[0.0, 0.0], Some(vec![([0, 0], 2.0)])).unwrap();
        let psi = bump(c, r, 1.0);
        let direct = pair(&u, &psi).unwrap();
        prop_assert!(close(pair(&fam.member(), &psi).unwrap(), direct, 1e-10));
    }
}

#[test]
fn enlargement_is_distance_set() {
    let k = Region::cube(1, -0.25, 0.25);
    let e = k.enlargement(1.0);
    for i in 0..=400 {
        let x = -2.0 + i as f64 * 0.01;
        let d = (x.abs() - 0.25).max(0.0);
        if (d - 1.0).abs() > 1e-9 {
            assert_eq!(e.contains(&[x, 0.0]), d <= 1.0, "x = {x}");
        }
    }
}

#[test]
fn regularity_reports_are_deterministic() {
    let u = kernel("powerlaw@0:-0.5", 1);
    let region = Region::cube(1, -0.5, 0.5);
    let a = serde_json::to_string(&estimate_holder_exponent(&u, &region).unwrap()).unwrap();
    let b = serde_json::to_string(&estimate_holder_exponent(&u, &region).unwrap()).unwrap();
    assert_eq!(a, b);
}
