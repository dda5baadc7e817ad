//! Germs `x ↦ F_x` of local models, their two-scale coherence, and
//! reconstruction of product germs `F_x = P_x · g`.

use serde::{Deserialize, Serialize};

use crate::closed_form::ClosedForm;
use crate::config::{ext_f64, RunConfig};
use crate::error::{Error, Result};
use crate::fit::{fit_line, fit_log_corrected};
use crate::jet::{factorial, multi_indices};
use crate::kernels::{multiply_by_smooth, DistributionExpr};
use crate::product::{
    check_young_microlocal_with, holder_value, working_region, young_product_with, Decision,
};
use crate::region::{Point, Region};
use crate::regularity::{estimate_holder_exponent_with, SLOPE_EPS};
use crate::scan::{relevant_singular_points, sup_points, ScaleRange};
use crate::testfn::{make_bump, TestFunction};

/// Taylor order used when `f` is smooth.
pub const MAX_GERM_ORDER: usize = 4;

/// Base points per coherence check (per axis in 1D).
pub const COHERENCE_BASE_POINTS: usize = 17;

/// Number of dyadic offsets `|x - y|` per base point.
pub const COHERENCE_OFFSETS: usize = 8;

/// Tolerance on fitted exponents.
pub const EXPONENT_TOL: f64 = 0.1;

/// Differences below this fraction of the pairings themselves count as zero.
const RELATIVE_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone)]
pub enum GermKind {
    /// `F_x = P_x · g` with `P_x` the Taylor polynomial of `f` at `x`.
    Product {
        f: DistributionExpr,
        taylor: ClosedForm,
    },
    /// `F_x = g` for every `x`.
    Constant,
    /// `F_x = g + 1[x_1 ≥ at] · jump`.
    Jump { jump: DistributionExpr, at: f64 },
}

#[derive(Debug, Clone)]
pub struct Germ {
    pub kind: GermKind,
    pub g: DistributionExpr,
    /// Hölder exponent of `f` (`+∞` when smooth, `0` for non-product germs).
    pub alpha: f64,
    /// Hölder exponent of `g`.
    pub beta: f64,
    /// Largest `|k|` in the Taylor polynomial.
    pub order: usize,
}

/// `|k| < α`, with `α` within estimator noise of an integer rounded down.
pub fn taylor_order(alpha: f64) -> usize {
    if !alpha.is_finite() {
        return MAX_GERM_ORDER;
    }
    ((alpha - SLOPE_EPS).ceil() as i64 - 1).clamp(0, MAX_GERM_ORDER as i64) as usize
}

pub fn product_germ(f: &DistributionExpr, g: &DistributionExpr) -> Result<Germ> {
    product_germ_with(f, g, &RunConfig::default())
}

/// Estimates `α̂(f)`, `β̂(g)` on the working region and builds `P_x · g`.
pub fn product_germ_with(
    f: &DistributionExpr,
    g: &DistributionExpr,
    cfg: &RunConfig,
) -> Result<Germ> {
    let mut pts: Vec<Point> = f
        .singular_support()
        .points()
        .map(|p| p.to_vec())
        .unwrap_or_default();
    pts.extend(
        g.singular_support()
            .points()
            .map(|p| p.to_vec())
            .unwrap_or_default(),
    );
    let region = working_region(f.dim(), &pts);
    let alpha = holder_value(&estimate_holder_exponent_with(f, &region, cfg.scales)?);
    let beta = holder_value(&estimate_holder_exponent_with(g, &region, cfg.scales)?);
    product_germ_from_exponents(f, g, alpha, beta)
}

/// `P_x · g` with known exponents.
pub fn product_germ_from_exponents(
    f: &DistributionExpr,
    g: &DistributionExpr,
    alpha: f64,
    beta: f64,
) -> Result<Germ> {
    if f.dim() != g.dim() {
        return Err(Error::DomainMismatch(
            "factors live in different dimensions".into(),
        ));
    }
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "product germs need α > 0, got {alpha}"
        )));
    }
    let taylor = f.as_closed_form().ok_or_else(|| {
        Error::InvalidInput(format!("{} has no closed form to expand", f.label()))
    })?;
    Ok(Germ {
        kind: GermKind::Product {
            f: f.clone(),
            taylor,
        },
        g: g.clone(),
        alpha,
        beta,
        order: taylor_order(alpha),
    })
}

pub fn constant_germ(g: &DistributionExpr, beta: f64) -> Germ {
    Germ {
        kind: GermKind::Constant,
        g: g.clone(),
        alpha: 0.0,
        beta,
        order: 0,
    }
}

/// `F_x = g + 1[x_1 ≥ at] · jump`, incoherent for every `γ > 0`.
pub fn jump_germ(
    g: &DistributionExpr,
    jump: &DistributionExpr,
    at: f64,
    beta: f64,
) -> Result<Germ> {
    if g.dim() != jump.dim() {
        return Err(Error::DomainMismatch(
            "jump lives in a different dimension".into(),
        ));
    }
    Ok(Germ {
        kind: GermKind::Jump {
            jump: jump.clone(),
            at,
        },
        g: g.clone(),
        alpha: 0.0,
        beta,
        order: 0,
    })
}

impl Germ {
    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn f(&self) -> Option<&DistributionExpr> {
        match &self.kind {
            GermKind::Product { f, .. } => Some(f),
            _ => None,
        }
    }

    /// `(α_K, γ) = (β, α + β)` for product germs, `(β, β)` otherwise.
    pub fn claimed_parameters(&self) -> (f64, f64) {
        match self.kind {
            GermKind::Product { .. } => (self.beta, self.alpha + self.beta),
            _ => (self.beta, self.beta),
        }
    }

    /// `P_x(y) = Σ_{|k| ≤ order} ∂^k f(x)/k! (y - x)^k`.
    pub fn taylor_polynomial(&self, x: &Point) -> Result<Option<ClosedForm>> {
        let GermKind::Product { taylor, .. } = &self.kind else {
            return Ok(None);
        };
        let dim = self.dim();
        let jet = taylor.jet(x, dim, self.order)?;
        let terms = multi_indices(dim, self.order)
            .into_iter()
            .map(|k| {
                let c = jet.get(k) / (factorial(k[0]) * factorial(k[1]));
                (
                    c,
                    ClosedForm::Monomial {
                        center: *x,
                        powers: k,
                    },
                )
            })
            .filter(|(c, _)| *c != 0.0)
            .collect::<Vec<_>>();
        Ok(Some(if terms.is_empty() {
            ClosedForm::Constant(0.0)
        } else {
            ClosedForm::Sum(terms)
        }))
    }

    /// The model `F_x`.
    pub fn at(&self, x: &Point) -> Result<DistributionExpr> {
        match &self.kind {
            GermKind::Product { .. } => {
                let p = self.taylor_polynomial(x)?.expect("product germ");
                multiply_by_smooth(&self.g, p)
            }
            GermKind::Constant => Ok(self.g.clone()),
            GermKind::Jump { jump, at } => {
                if x[0] >= *at {
                    DistributionExpr::sum(vec![(1.0, self.g.clone()), (1.0, jump.clone())])
                } else {
                    Ok(self.g.clone())
                }
            }
        }
    }

    /// `F_x(φ^λ_y)`.
    pub fn pair_at(&self, x: &Point, phi: &TestFunction, y: &Point, lambda: f64) -> Result<f64> {
        self.at(x)?.pair_scaled(phi, y, lambda)
    }

    fn singular_points(&self) -> Vec<Point> {
        let mut pts: Vec<Point> = self
            .g
            .singular_support()
            .points()
            .map(|p| p.to_vec())
            .unwrap_or_default();
        match &self.kind {
            GermKind::Product { f, .. } => pts.extend(
                f.singular_support()
                    .points()
                    .map(|p| p.to_vec())
                    .unwrap_or_default(),
            ),
            GermKind::Jump { jump, at } => {
                pts.extend(
                    jump.singular_support()
                        .points()
                        .map(|p| p.to_vec())
                        .unwrap_or_default(),
                );
                pts.push([*at, 0.0]);
            }
            GermKind::Constant => {}
        }
        pts
    }
}

/// One measured difference `|(F_x - F_y)(φ^λ_y)|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceSample {
    pub x: Point,
    pub y: Point,
    pub lambda: f64,
    pub offset: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    #[serde(with = "ext_f64")]
    pub gamma_claimed: f64,
    #[serde(with = "ext_f64")]
    pub alpha_k_claimed: f64,
    /// Largest difference for each `(λ, |x - y|)` over base points and directions.
    pub samples: Vec<CoherenceSample>,
    /// λ-exponent over `λ ≤ |x - y|`, the fitted `α_K`.
    #[serde(with = "ext_f64")]
    pub lambda_slope: f64,
    /// `|x - y|`-exponent over `λ ≤ |x - y|`, the fitted `γ - α_K`.
    #[serde(with = "ext_f64")]
    pub offset_slope: f64,
    /// Exponent of `sup_{|x - y| ≤ λ}` against `λ`, the fitted `γ`.
    #[serde(with = "ext_f64")]
    pub combined_slope: f64,
    pub pass: bool,
}

impl CoherenceReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("scale,offset,magnitude\n");
        for r in &self.samples {
            s.push_str(&format!("{:e},{:e},{:e}\n", r.lambda, r.offset, r.value));
        }
        s
    }
}

/// Two-variable least squares `z = a·u + b·v + c`.
fn fit_plane(u: &[f64], v: &[f64], z: &[f64]) -> Option<(f64, f64)> {
    let n = u.len() as f64;
    let mean = |w: &[f64]| w.iter().sum::<f64>() / n;
    let (mu, mv, mz) = (mean(u), mean(v), mean(z));
    let (mut suu, mut svv, mut suv, mut suz, mut svz) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..u.len() {
        let (a, b, c) = (u[i] - mu, v[i] - mv, z[i] - mz);
        suu += a * a;
        svv += b * b;
        suv += a * b;
        suz += a * c;
        svz += b * c;
    }
    let det = suu * svv - suv * suv;
    if det.abs() <= 1e-12 * (suu * svv).max(1e-300) {
        return None;
    }
    Some(((suz * svv - svz * suv) / det, (svz * suu - suz * suv) / det))
}

fn base_points(region: &Region, singular: &[Point]) -> Vec<Point> {
    let n = if region.dim() == 1 {
        COHERENCE_BASE_POINTS
    } else {
        5
    };
    let mut pts = region.grid_samples(n);
    for p in singular {
        if region.contains(p) && !pts.iter().any(|q| q == p) {
            pts.push(*p);
        }
    }
    pts
}

/// Samples `|(F_x - F_y)(φ^λ_y)|` for base points `y ∈ K`, offsets
/// `x - y = ±2^{-m} e_i` and dyadic `λ`, then reads off `α_K` from the regime
/// `λ ≤ |x - y|` and `γ` from the diagonal regime `|x - y| ≤ λ`.
pub fn check_coherence(
    germ: &Germ,
    gamma: f64,
    alpha_k: f64,
    region: &Region,
) -> Result<CoherenceReport> {
    check_coherence_with(germ, gamma, alpha_k, region, ScaleRange::default())
}

pub fn check_coherence_with(
    germ: &Germ,
    gamma: f64,
    alpha_k: f64,
    region: &Region,
    range: ScaleRange,
) -> Result<CoherenceReport> {
    let dim = germ.dim();
    let phi = make_bump(dim, 1.0, 2);
    let ys = base_points(region, &germ.singular_points());
    let offsets: Vec<f64> = (0..COHERENCE_OFFSETS)
        .map(|i| 2f64.powi(-(range.n_min as i32 + i as i32)))
        .collect();
    let lambdas = range.lambdas();
    let mut samples = Vec::new();
    for &h in &offsets {
        for &lam in &lambdas {
            let mut best = CoherenceSample {
                x: [0.0; 2],
                y: [0.0; 2],
                lambda: lam,
                offset: h,
                value: 0.0,
            };
            for y in &ys {
                let fy = germ.pair_at(y, &phi, y, lam)?;
                for axis in 0..dim {
                    for s in [-1.0, 1.0] {
                        let mut x = *y;
                        x[axis] += s * h;
                        let fx = germ.pair_at(&x, &phi, y, lam)?;
                        let d = (fx - fy).abs();
                        if d <= RELATIVE_FLOOR * fx.abs().max(fy.abs()) {
                            continue;
                        }
                        if d > best.value {
                            best = CoherenceSample {
                                x,
                                y: *y,
                                lambda: lam,
                                offset: h,
                                value: d,
                            };
                        }
                    }
                }
            }
            samples.push(best);
        }
    }

    let nonzero: Vec<&CoherenceSample> = samples.iter().filter(|s| s.value > 0.0).collect();
    let (mut lu, mut lv, mut lz) = (Vec::new(), Vec::new(), Vec::new());
    for s in nonzero.iter().filter(|s| s.lambda <= s.offset) {
        lu.push(s.lambda.log2());
        lv.push(s.offset.log2());
        lz.push(s.value.log2());
    }
    let (lambda_slope, offset_slope) = if lu.len() < 4 {
        (f64::INFINITY, f64::INFINITY)
    } else {
        fit_plane(&lu, &lv, &lz).unwrap_or((f64::NAN, f64::NAN))
    };
    let (mut cx, mut cy) = (Vec::new(), Vec::new());
    let h_min = offsets.iter().copied().fold(f64::INFINITY, f64::min);
    for &lam in lambdas.iter().filter(|l| **l >= h_min) {
        let m = samples
            .iter()
            .filter(|s| s.lambda == lam && s.offset <= lam)
            .map(|s| s.value)
            .fold(0.0, f64::max);
        if m > 0.0 {
            cx.push(lam.log2());
            cy.push(m.log2());
        }
    }
    let combined_slope = if cx.len() < 3 {
        f64::INFINITY
    } else {
        fit_line(&cx, &cy)?.slope
    };
    let pass = lambda_slope >= alpha_k - EXPONENT_TOL && combined_slope >= gamma - EXPONENT_TOL;
    Ok(CoherenceReport {
        gamma_claimed: gamma,
        alpha_k_claimed: alpha_k,
        samples,
        lambda_slope,
        offset_slope,
        combined_slope,
        pass,
    })
}

/// Coherence at the parameters `(β, α + β)` claimed for product germs.
pub fn check_product_coherence(germ: &Germ, region: &Region) -> Result<CoherenceReport> {
    let (ak, gamma) = germ.claimed_parameters();
    check_coherence(germ, gamma, ak, region)
}

/// `R F = f · g` for admissible product germs.
pub fn reconstruct_product_germ(germ: &Germ) -> Result<DistributionExpr> {
    reconstruct_product_germ_with(germ, &RunConfig::default())
}

pub fn reconstruct_product_germ_with(germ: &Germ, cfg: &RunConfig) -> Result<DistributionExpr> {
    let f = germ
        .f()
        .ok_or_else(|| Error::InvalidInput("only product germs are reconstructed".into()))?;
    let adm = check_young_microlocal_with(f, &germ.g, cfg)?;
    if !adm.decision.is_admissible() {
        let reason = adm
            .reason
            .clone()
            .unwrap_or_else(|| format!("{:?}", adm.decision));
        return Err(match adm.decision {
            Decision::Inconclusive => Error::Inconclusive(reason),
            _ => Error::NotAdmissible(reason),
        });
    }
    young_product_with(f, &germ.g, &adm)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    #[serde(with = "ext_f64")]
    pub gamma_claimed: f64,
    /// `(λ, sup_x |(RF - F_x)(φ^λ_x)|)`.
    pub samples: Vec<(f64, f64)>,
    #[serde(with = "ext_f64")]
    pub slope: f64,
    pub stderr: f64,
    /// Power `c` of a `|log λ|^c` factor fitted alongside the slope.
    #[serde(with = "ext_f64")]
    pub log_power: f64,
    pub pass: bool,
}

impl ReconstructionReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("scale,magnitude\n");
        for (l, m) in &self.samples {
            s.push_str(&format!("{l:e},{m:e}\n"));
        }
        s
    }
}

/// Measures `sup_{x ∈ K} |(RF - F_x)(φ^λ_x)|` and checks it decays like `λ^γ`
/// with `γ = α + β`.
pub fn verify_reconstruction_bound(
    germ: &Germ,
    rf: &DistributionExpr,
    region: &Region,
) -> Result<ReconstructionReport> {
    verify_reconstruction_bound_with(germ, rf, region, ScaleRange::default())
}

pub fn verify_reconstruction_bound_with(
    germ: &Germ,
    rf: &DistributionExpr,
    region: &Region,
    range: ScaleRange,
) -> Result<ReconstructionReport> {
    let dim = germ.dim();
    let phi = make_bump(dim, 1.0, 2);
    let (_, gamma) = germ.claimed_parameters();
    let mut singular = relevant_singular_points(&germ.g, region);
    singular.extend(
        germ.singular_points()
            .into_iter()
            .filter(|p| region.contains(p)),
    );
    let mut samples = Vec::new();
    for lam in range.lambdas() {
        let mut m = 0.0f64;
        for x in sup_points(region, &singular, lam) {
            let a = rf.pair_scaled(&phi, &x, lam)?;
            let b = germ.pair_at(&x, &phi, &x, lam)?;
            let d = (a - b).abs();
            if d > RELATIVE_FLOOR * a.abs().max(b.abs()) {
                m = m.max(d);
            }
        }
        samples.push((lam, m));
    }
    let usable: Vec<&(f64, f64)> = samples.iter().filter(|s| s.1 > 0.0).collect();
    let (slope, stderr, log_power) = if usable.len() < 4 {
        (f64::INFINITY, 0.0, 0.0)
    } else {
        let xs: Vec<f64> = usable.iter().map(|s| s.0.log2()).collect();
        let ys: Vec<f64> = usable.iter().map(|s| s.1.log2()).collect();
        let fit = fit_line(&xs, &ys)?;
        let lc = fit_log_corrected(&xs, &ys)
            .map(|f| f.log_power)
            .unwrap_or(f64::NAN);
        (fit.slope, fit.stderr, lc)
    };
    Ok(ReconstructionReport {
        gamma_claimed: gamma,
        samples,
        slope,
        stderr,
        log_power,
        pass: slope >= gamma - EXPONENT_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cusp(a: f64) -> DistributionExpr {
        DistributionExpr::smooth(1, ClosedForm::cusp([0.0, 0.0], a))
    }

    #[test]
    fn taylor_orders() {
        assert_eq!(taylor_order(0.8), 0);
        assert_eq!(taylor_order(1.02), 0);
        assert_eq!(taylor_order(1.5), 1);
        assert_eq!(taylor_order(f64::INFINITY), MAX_GERM_ORDER);
    }

    #[test]
    fn delta_germ_is_f_at_x() {
        let d = DistributionExpr::delta(1, [0.0, 0.0]);
        let g = product_germ_from_exponents(&cusp(0.6), &d, 0.6, -1.0).unwrap();
        let phi = make_bump(1, 1.0, 2);
        let x = [0.3, 0.0];
        let v = g.pair_at(&x, &phi, &[0.0, 0.0], 1.0).unwrap();
        assert!((v - 0.3f64.powf(0.6) * phi.value(&[0.0, 0.0])).abs() < 1e-14);
    }

    #[test]
    fn first_order_germ() {
        let d = DistributionExpr::delta(1, [0.0, 0.0]);
        let g = product_germ_from_exponents(&cusp(1.5), &d, 1.5, -1.0).unwrap();
        let phi = make_bump(1, 1.0, 2);
        let x = 0.4f64;
        let want = (x.powf(1.5) - 1.5 * x.powf(0.5) * x) * phi.value(&[0.0, 0.0]);
        let v = g.pair_at(&[x, 0.0], &phi, &[0.0, 0.0], 1.0).unwrap();
        assert!((v - want).abs() < 1e-13);
    }

    #[test]
    fn constant_germ_is_coherent() {
        let g = constant_germ(&DistributionExpr::delta(1, [0.0, 0.0]), -1.0);
        let r = check_coherence(&g, 0.0, -1.0, &Region::cube(1, -0.5, 0.5)).unwrap();
        assert!(r.pass && r.samples.iter().all(|s| s.value == 0.0));
    }

    #[test]
    fn jump_germ_fails_positive_gamma() {
        let g = DistributionExpr::constant(1, 1.0);
        let jg = jump_germ(&g, &DistributionExpr::constant(1, 1.0), 0.0, 0.0).unwrap();
        let r = check_coherence(&jg, 0.5, 0.0, &Region::cube(1, -0.5, 0.5)).unwrap();
        assert!(!r.pass);
        assert!(r.combined_slope.abs() < 0.05 && r.lambda_slope.abs() < 0.05);
    }

    #[test]
    fn delta_cusp_coherence_and_bound() {
        let d = DistributionExpr::delta(1, [0.0, 0.0]);
        let g = product_germ_from_exponents(&cusp(0.8), &d, 0.8, -1.0).unwrap();
        let k = Region::cube(1, -0.5, 0.5);
        let r = check_product_coherence(&g, &k).unwrap();
        assert!(r.pass, "{r:?}");
        assert!((r.lambda_slope + 1.0).abs() < 0.1 && (r.combined_slope + 0.2).abs() < 0.1);
        let rf = reconstruct_product_germ(&g).unwrap();
        let b = verify_reconstruction_bound(&g, &rf, &k).unwrap();
        assert!(b.pass && (b.slope + 0.2).abs() < 0.1, "{b:?}");
    }
}
