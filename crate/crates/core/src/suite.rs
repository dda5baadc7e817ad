//! Reference checks against the closed-form statements the toolkit is built
//! around, each reported as one pass/fail row.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::closed_form::ClosedForm;
use crate::config::RunConfig;
use crate::error::Result;
use crate::extension::{multiply_and_extend_with, scaling_degree_with};
use crate::germs::{
    check_product_coherence, product_germ_from_exponents, reconstruct_product_germ_with,
    verify_reconstruction_bound_with,
};
use crate::kernels::DistributionExpr;
use crate::product::{
    check_young_classical, check_young_microlocal_with, holder_value, young_product_with,
};
use crate::region::{Point, Region};
use crate::regularity::{estimate_beta_star_with, estimate_holder_exponent_with};
use crate::testfn::TestFunction;

const ORIGIN: Point = [0.0, 0.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteCheck {
    pub criterion: String,
    pub statement: String,
    pub expected: String,
    pub measured: String,
    pub pass: bool,
}

fn row(
    criterion: &str,
    statement: &str,
    expected: String,
    measured: String,
    pass: bool,
) -> SuiteCheck {
    SuiteCheck {
        criterion: criterion.into(),
        statement: statement.into(),
        expected,
        measured,
        pass,
    }
}

fn failed(
    criterion: &str,
    statement: &str,
    expected: String,
    err: impl std::fmt::Display,
) -> SuiteCheck {
    row(
        criterion,
        statement,
        expected,
        format!("error: {err}"),
        false,
    )
}

/// `1 + |x|`: `C^1` with a single cusp at the origin and `f(0) = 1`.
pub fn unit_cusp_function(dim: usize) -> DistributionExpr {
    DistributionExpr::smooth(
        dim,
        ClosedForm::Constant(1.0).plus(ClosedForm::cusp(ORIGIN, 1.0)),
    )
    .with_label("1+cusp@0:1")
}

/// Random off-centre bumps inside `[-0.9, 0.9]`.
pub fn random_test_functions(seed: u64, count: usize) -> Vec<TestFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let r: f64 = rng.random_range(0.2..0.6);
            let c: f64 = rng.random_range(-0.3..0.3);
            let a: f64 = rng.random_range(0.5..2.0);
            let s: f64 = rng.random_range(0.5..2.0);
            TestFunction::bump_at(1, [c, 0.0], r, s, a)
        })
        .collect()
}

fn beta_star_delta(cfg: &RunConfig, dim: usize) -> SuiteCheck {
    let (want, tol) = if dim == 1 { (-0.5, 0.1) } else { (-1.0, 0.15) };
    let stmt = "β*_δ = -d/2";
    let expected = format!("{want} ± {tol} (d={dim})");
    let region = Region::cube(dim, -0.5, 0.5);
    match estimate_beta_star_with(
        &DistributionExpr::delta(dim, ORIGIN),
        &region,
        &cfg.p_samples,
        cfg.scales,
    ) {
        Ok(r) => row(
            "1",
            stmt,
            expected,
            format!("{:.4}", r.value),
            (r.value - want).abs() <= tol,
        ),
        Err(e) => failed("1", stmt, expected, e),
    }
}

fn beta_star_power(cfg: &RunConfig, beta: f64) -> SuiteCheck {
    let stmt = "β*_g = β + d/2";
    let want = beta + 0.5;
    let expected = format!("{want} ± 0.1 (β={beta})");
    let region = Region::cube(1, -0.5, 0.5);
    match estimate_beta_star_with(
        &DistributionExpr::power_law(1, ORIGIN, beta),
        &region,
        &cfg.p_samples,
        cfg.scales,
    ) {
        Ok(r) => row(
            "2",
            stmt,
            expected,
            format!("{:.4}", r.value),
            (r.value - want).abs() <= 0.1,
        ),
        Err(e) => failed("2", stmt, expected, e),
    }
}

fn scaling_degree_delta(cfg: &RunConfig, dim: usize) -> SuiteCheck {
    let stmt = "sd_x(δ_x) = d";
    let expected = format!("{dim} ± 0.05");
    match scaling_degree_with(&DistributionExpr::delta(dim, ORIGIN), &ORIGIN, cfg.scales) {
        Ok(s) => row(
            "4",
            stmt,
            expected,
            format!("{:.4}", s.value),
            (s.value - dim as f64).abs() <= 0.05,
        ),
        Err(e) => failed("4", stmt, expected, e),
    }
}

fn microlocal_gate(cfg: &RunConfig) -> SuiteCheck {
    let stmt = "f ∈ C^1, δ: d - d/2 = d/2 > 0";
    let expected = "classical rejects, microlocal accepts, margin 0.5 ± 0.1".to_string();
    let f = unit_cusp_function(1);
    let d = DistributionExpr::delta(1, ORIGIN);
    let region = Region::cube(1, -0.5, 0.5);
    let run = || -> Result<SuiteCheck> {
        let a = holder_value(&estimate_holder_exponent_with(&f, &region, cfg.scales)?);
        let b = holder_value(&estimate_holder_exponent_with(&d, &region, cfg.scales)?);
        let classical = check_young_classical(a, b);
        let adm = check_young_microlocal_with(&f, &d, cfg)?;
        let margin = adm
            .ledger
            .iter()
            .map(|e| e.margin)
            .fold(f64::INFINITY, f64::min);
        let pass =
            !classical.admissible && adm.decision.is_admissible() && (margin - 0.5).abs() <= 0.1;
        Ok(row(
            "5",
            stmt,
            expected.clone(),
            format!(
                "α+β={:.3} classical={} decision={:?} margin={margin:.3}",
                a + b,
                classical.admissible,
                adm.decision
            ),
            pass,
        ))
    };
    run().unwrap_or_else(|e| failed("5", stmt, expected.clone(), e))
}

fn product_value(cfg: &RunConfig) -> SuiteCheck {
    let stmt = "f δ_0 = f(0) δ_0";
    let expected = "relative error ≤ 1e-8 on 20 test functions".to_string();
    let f = unit_cusp_function(1);
    let d = DistributionExpr::delta(1, ORIGIN);
    let run = || -> Result<SuiteCheck> {
        let adm = check_young_microlocal_with(&f, &d, cfg)?;
        let p = young_product_with(&f, &d, &adm)?;
        let mut worst = 0.0f64;
        for psi in random_test_functions(cfg.seed, 20) {
            let want = psi.value(&ORIGIN);
            let got = p.pair(&psi)?;
            worst = worst.max((got - want).abs() / want.abs().max(1e-300));
        }
        Ok(row(
            "6",
            stmt,
            expected.clone(),
            format!("max relative error {worst:.2e}"),
            worst <= 1e-8,
        ))
    };
    run().unwrap_or_else(|e| failed("6", stmt, expected.clone(), e))
}

/// `-∫ log|x| ψ'(x) dx`, the literal oracle.
fn log_derivative_oracle(psi: &TestFunction) -> Result<f64> {
    DistributionExpr::log_derivative(ORIGIN).pair(psi)
}

fn extension_family(cfg: &RunConfig) -> Vec<SuiteCheck> {
    let stmt = "|x|^{-1/2}·|x|^{-1/2} extends as (d/dx) log|x| + C δ_0";
    let h = DistributionExpr::power_law(1, ORIGIN, -0.5);
    let fam = match multiply_and_extend_with(&h, &h, cfg) {
        Ok(f) => f,
        Err(e) => return vec![failed("7", stmt, "a one-parameter family".into(), e)],
    };
    let psis = random_test_functions(cfg.seed.wrapping_add(1), 20);
    let run = || -> Result<(f64, f64, f64)> {
        let base = fam.base_member();
        let shifted = fam.member_with(&[([0, 0], 1.5)]);
        let (mut law, mut literal, mut finite_part) = (0.0f64, 0.0f64, 0.0f64);
        // the finite part of |x|^{-1} is the member whose a_0 matches it on the first ψ
        let fp = DistributionExpr::signed_log_derivative(ORIGIN);
        let a0 = (fp.pair(&psis[0])? - base.pair(&psis[0])?) / psis[0].value(&ORIGIN);
        let matched = fam.member_with(&[([0, 0], a0)]);
        for psi in &psis {
            let b = base.pair(psi)?;
            law = law.max((shifted.pair(psi)? - b - 1.5 * psi.value(&ORIGIN)).abs());
            literal = literal.max((b - log_derivative_oracle(psi)?).abs());
            finite_part = finite_part.max((matched.pair(psi)? - fp.pair(psi)?).abs());
        }
        Ok((law, literal, finite_part))
    };
    match run() {
        Ok((law, literal, finite_part)) => {
            let shape =
                fam.order == Some(0) && fam.free_indices().len() == 1 && fam.rho.abs() <= 0.1;
            vec![
                row(
                    "7",
                    stmt,
                    "ρ = 0 ± 0.1, one free a_0, members differ by a_0 ψ(0), finite part is a member".into(),
                    format!(
                        "ρ={:.4} free={} law err={law:.1e} finite-part err={finite_part:.1e}",
                        fam.rho,
                        fam.free_indices().len()
                    ),
                    shape && law <= 1e-10 && finite_part <= 1e-6,
                ),
                row(
                    "7-literal",
                    "base member equals -∫ log|x| ψ'(x) dx",
                    "≤ 1e-6".into(),
                    format!("max abs error {literal:.3e}"),
                    literal <= 1e-6,
                ),
            ]
        }
        Err(e) => vec![failed("7", stmt, "pairings".into(), e)],
    }
}

fn uniqueness(cfg: &RunConfig) -> SuiteCheck {
    let stmt = "sd < d: unique extension preserving the scaling degree";
    let expected = "unique, re-estimated sd = 0.5 ± 0.1".to_string();
    let f = DistributionExpr::power_law(1, ORIGIN, -0.2);
    let g = DistributionExpr::power_law(1, ORIGIN, -0.3);
    let run = || -> Result<SuiteCheck> {
        let fam = multiply_and_extend_with(&f, &g, cfg)?;
        let sd = fam.reestimate_scaling_degree()?;
        Ok(row(
            "8",
            stmt,
            expected.clone(),
            format!("unique={} sd={sd:.4}", fam.unique),
            fam.unique && (sd - 0.5).abs() <= 0.1 && (sd - fam.scaling_degree.value).abs() <= 0.1,
        ))
    };
    run().unwrap_or_else(|e| failed("8", stmt, expected.clone(), e))
}

fn germ_checks(cfg: &RunConfig) -> SuiteCheck {
    let stmt = "P_x·g is (β, α+β)-coherent with RF = f·g";
    let expected = "coherence (-1, -0.2) ± 0.1, bound slope -0.2 ± 0.1; α+β=0 bounded".to_string();
    let region = Region::cube(1, -0.5, 0.5);
    let d = DistributionExpr::delta(1, ORIGIN);
    let run = || -> Result<SuiteCheck> {
        let f = DistributionExpr::smooth(1, ClosedForm::cusp(ORIGIN, 0.8));
        let a = holder_value(&estimate_holder_exponent_with(&f, &region, cfg.scales)?);
        let germ = product_germ_from_exponents(&f, &d, a, -1.0)?;
        let coh = check_product_coherence(&germ, &region)?;
        let rf = reconstruct_product_germ_with(&germ, cfg)?;
        let bound = verify_reconstruction_bound_with(&germ, &rf, &region, cfg.scales)?;
        let f1 = unit_cusp_function(1);
        let germ1 = product_germ_from_exponents(&f1, &d, 1.0, -1.0)?;
        let rf1 = reconstruct_product_germ_with(&germ1, cfg)?;
        let b1 = verify_reconstruction_bound_with(&germ1, &rf1, &region, cfg.scales)?;
        let pass = (coh.lambda_slope + 1.0).abs() <= 0.1
            && (coh.combined_slope + 0.2).abs() <= 0.1
            && (bound.slope + 0.2).abs() <= 0.1
            && b1.slope >= -0.1
            && b1.log_power < 0.5;
        Ok(row(
            "12",
            stmt,
            expected.clone(),
            format!(
                "coherence ({:.3}, {:.3}) bound slope {:.3}; α+β=0 slope {:.3} log power {:.3}",
                coh.lambda_slope, coh.combined_slope, bound.slope, b1.slope, b1.log_power
            ),
            pass,
        ))
    };
    run().unwrap_or_else(|e| failed("12", stmt, expected.clone(), e))
}

/// Every check backed by a closed-form statement, in criterion order.
pub fn run_paper_suite(cfg: &RunConfig) -> Vec<SuiteCheck> {
    let mut out = vec![
        beta_star_delta(cfg, 1),
        beta_star_delta(cfg, 2),
        beta_star_power(cfg, -0.75),
        beta_star_power(cfg, -0.9),
        scaling_degree_delta(cfg, 1),
        scaling_degree_delta(cfg, 2),
        microlocal_gate(cfg),
        product_value(cfg),
    ];
    out.extend(extension_family(cfg));
    out.push(uniqueness(cfg));
    out.push(germ_checks(cfg));
    out
}

/// Fixed-width table of suite rows.
pub fn format_table(rows: &[SuiteCheck]) -> String {
    let mut s = String::new();
    for r in rows {
        s.push_str(&format!(
            "{:<4} {:<10} {:<58} {}\n",
            if r.pass { "PASS" } else { "FAIL" },
            r.criterion,
            r.statement,
            r.measured
        ));
    }
    s
}
