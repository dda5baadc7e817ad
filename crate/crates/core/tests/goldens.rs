//! Frozen reference values. Each was produced by an independent 30-digit
//! quadrature or sup search (`tests/oracles/goldens.py`) and is checked here
//! against the library.

use microyoung::{cr_norm, pair, pair_scaled, parse_kernel, DistributionExpr, TestFunction};

/// `∫ |x|^{-1/2} e^{-1/(1-x²)} dx` over `(-1, 1)`.
const POWER_HALF: f64 = 1.123_083_868_947_657_7;
/// `∫ |x|^{-3/4} e^{-1/(1-x²)} dx`.
const POWER_THREE_QUARTERS: f64 = 2.557_351_060_708_479;
/// `∫ |x|^{0.6} e^{-1/(1-x²)} dx`.
const CUSP_06: f64 = 0.216_133_073_927_567_54;
/// Sup norms of `e^{-1/(1-x²)}` and its first two derivatives.
const SUP_D0: f64 = 0.367_879_441_171_442_3;
const SUP_D1: f64 = 0.798_429_751_833_599_5;
const SUP_D2: f64 = 7.749_704_941_694_145;

fn raw_bump() -> TestFunction {
    TestFunction::bump_at(1, [0.0, 0.0], 1.0, 1.0, 1.0)
}

fn kernel(id: &str) -> DistributionExpr {
    parse_kernel(id, 1).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Gauss-Legendre on `n` panels after `x = t²`, which removes the `|x|^{-1/2}` singularity.
fn substituted_oracle(n: usize) -> f64 {
    const X: [f64; 5] = [
        0.0,
        0.538_469_310_105_683,
        0.906_179_845_938_664,
        -0.538_469_310_105_683,
        -0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_889,
        0.478_628_670_499_366,
        0.236_926_885_056_189,
        0.478_628_670_499_366,
        0.236_926_885_056_189,
    ];
    let h = 1.0 / n as f64;
    let mut s = 0.0;
    for i in 0..n {
        let mid = (i as f64 + 0.5) * h;
        for (x, w) in X.iter().zip(W) {
            let t: f64 = mid + 0.5 * h * x;
            let y = t * t;
            if y < 1.0 {
                s += w * 0.5 * h * 4.0 * (-1.0 / (1.0 - y * y)).exp();
            }
        }
    }
    s
}

#[test]
fn power_law_half_pairing() {
    let v = pair(&kernel("powerlaw@0:-0.5"), &raw_bump()).unwrap();
    assert!(rel(v, POWER_HALF) < 1e-8, "{v} vs {POWER_HALF}");
    assert!(rel(substituted_oracle(4000), POWER_HALF) < 1e-10);
}

#[test]
fn power_law_three_quarters_pairing() {
    let v = pair(&kernel("powerlaw@0:-0.75"), &raw_bump()).unwrap();
    assert!(rel(v, POWER_THREE_QUARTERS) < 1e-8, "{v}");
}

#[test]
fn cusp_pairing() {
    let v = pair(&kernel("cusp@0:0.6"), &raw_bump()).unwrap();
    assert!(rel(v, CUSP_06) < 1e-8, "{v}");
}

#[test]
fn power_law_homogeneity_against_golden() {
    let u = kernel("powerlaw@0:-0.5");
    for n in 2..=10 {
        let lam = 2f64.powi(-n);
        let v = pair_scaled(&u, &raw_bump(), &[0.0, 0.0], lam).unwrap();
        assert!(rel(v, lam.powf(-0.5) * POWER_HALF) < 1e-8, "n={n}: {v}");
    }
}

#[test]
fn smoothed_power_law_pairing() {
    let u = microyoung::multiply_by_smooth(
        &kernel("powerlaw@0:-0.5"),
        microyoung::ClosedForm::Bump {
            center: [0.0, 0.0],
            radius: 1.0,
            sharpness: 1.0,
            amplitude: 1.0,
        },
    )
    .unwrap();
    // `|x|^{-1/2}·b` against `b` integrates `|x|^{-1/2} e^{-2/(1-x²)}`, again via `x = t²`.
    let n = 4000;
    let mut s = 0.0;
    for i in 0..n {
        let t = (i as f64 + 0.5) / n as f64;
        let y = t * t;
        s += 4.0 * (-2.0 / (1.0 - y * y)).exp() / n as f64;
    }
    let v = pair(&u, &raw_bump()).unwrap();
    assert!(rel(v, s) < 1e-6, "{v} vs {s}");
}

#[test]
fn raw_bump_cr_norms() {
    let phi = raw_bump();
    assert!(rel(cr_norm(&phi, 0), SUP_D0) < 1e-12);
    assert!(rel(cr_norm(&phi, 1), SUP_D1) < 1e-5);
    assert!(rel(cr_norm(&phi, 2), SUP_D2) < 1e-5);
}
