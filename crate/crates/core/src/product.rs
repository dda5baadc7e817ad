//! Young products: admissibility decisions, product construction, and the
//! continuity bound `‖f·g‖_{C^β(K)} ≲ ‖f‖_{C^α(K̄₁)} ‖g‖_{C^β(K̄₁)}`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ext_f64, RunConfig};
use crate::error::{Error, Result};
use crate::kernels::{multiply_by_smooth, DistributionExpr, Kind};
use crate::region::{distance, Point, Region};
use crate::regularity::{
    estimate_beta_star_with, estimate_holder_exponent_with, localize, taylor_points,
    taylor_remainders, RegularityReport,
};
use crate::scan::{lp_over_x, ScaleRange};
use crate::testfn::plain_dictionary;
use crate::wavefront::{
    default_directions, pairwise_product_criterion, PairVerdict, PairwiseReport,
};

/// Cap on the localizer radius around a singular point.
pub const MAX_LOCALIZER_RADIUS: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    AdmissibleClassical,
    AdmissibleMicrolocal,
    AdmissibleDisjointSupport,
    RequiresExtension,
    NotAdmissible,
    Inconclusive,
}

impl Decision {
    pub fn is_admissible(&self) -> bool {
        matches!(
            self,
            Decision::AdmissibleClassical
                | Decision::AdmissibleMicrolocal
                | Decision::AdmissibleDisjointSupport
        )
    }
}

/// `α+β > 0`, with result exponent `min(α, β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalCheck {
    pub admissible: bool,
    #[serde(with = "ext_f64")]
    pub exponent: f64,
}

pub fn check_young_classical(alpha: f64, beta: f64) -> ClassicalCheck {
    ClassicalCheck {
        admissible: alpha + beta > 0.0,
        exponent: alpha.min(beta),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub x: Point,
    /// Hölder exponent of the localized positive factor; `inf` when smooth there.
    #[serde(with = "ext_f64")]
    pub alpha_local: f64,
    pub beta_star_local: f64,
    #[serde(with = "ext_f64")]
    pub margin: f64,
    pub localizer_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductAdmissibility {
    pub decision: Decision,
    pub ledger: Vec<LedgerEntry>,
    /// Regularity of the product, when admissible.
    #[serde(with = "ext_f64")]
    pub exponent: f64,
    /// Hölder exponents of the factors in role order (`f` first).
    #[serde(with = "ext_f64")]
    pub alpha: f64,
    #[serde(with = "ext_f64")]
    pub beta: f64,
    /// The inputs were swapped so that `f` carries the larger exponent.
    pub swapped: bool,
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairwise: Option<PairwiseReport>,
}

/// Hölder exponent with smooth reports mapped to `+∞`.
pub fn holder_value(r: &RegularityReport) -> f64 {
    if r.smooth {
        f64::INFINITY
    } else {
        r.value
    }
}

/// `[-1/2, 1/2]^d` grown to cover the given points with a margin, inside `[-3/4, 3/4]^d`.
pub fn working_region(dim: usize, points: &[Point]) -> Region {
    let mut lower = [0.0f64; 2];
    let mut upper = [0.0f64; 2];
    for i in 0..dim {
        lower[i] = -0.5;
        upper[i] = 0.5;
        for p in points {
            lower[i] = lower[i].min(p[i] - 0.25).max(-0.75);
            upper[i] = upper[i].max(p[i] + 0.25).min(0.75);
        }
    }
    Region::Box { dim, lower, upper }
}

fn points_of(u: &DistributionExpr) -> Vec<Point> {
    u.singular_support()
        .points()
        .map(<[Point]>::to_vec)
        .unwrap_or_default()
}

/// Half the smallest distance between distinct points, capped at [`MAX_LOCALIZER_RADIUS`].
fn localizer_radius(points: &[Point], dim: usize) -> f64 {
    let mut r = MAX_LOCALIZER_RADIUS;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            let d = distance(a, b, dim);
            if d > 1e-12 {
                r = r.min(0.5 * d);
            }
        }
    }
    r
}

pub fn check_young_microlocal(
    f: &DistributionExpr,
    g: &DistributionExpr,
) -> Result<ProductAdmissibility> {
    check_young_microlocal_with(f, g, &RunConfig::default())
}

fn verdict(decision: Decision, reason: Option<String>) -> ProductAdmissibility {
    ProductAdmissibility {
        decision,
        ledger: Vec::new(),
        exponent: f64::NAN,
        alpha: f64::NAN,
        beta: f64::NAN,
        swapped: false,
        reason,
        pairwise: None,
    }
}

/// Decision procedure: everywhere-singular factors are rejected; otherwise
/// Hölder exponents are estimated, the classical condition is tried, and
/// failing that the condition is checked point by point at the singular
/// points of the rougher factor using `α̂(φ_f f) + β̂*(φ_g g)`.
pub fn check_young_microlocal_with(
    f: &DistributionExpr,
    g: &DistributionExpr,
    cfg: &RunConfig,
) -> Result<ProductAdmissibility> {
    if f.dim() != g.dim() {
        return Err(Error::DomainMismatch(
            "factors live in different dimensions".into(),
        ));
    }
    let dim = f.dim();
    if f.singular_support().is_everywhere() || g.singular_support().is_everywhere() {
        return Ok(verdict(
            Decision::NotAdmissible,
            Some("singular support everywhere".into()),
        ));
    }
    let margin = cfg.margin;
    let mut all_points = points_of(f);
    all_points.extend(points_of(g));
    let k = working_region(dim, &all_points);
    let a_f = holder_value(&estimate_holder_exponent_with(f, &k, cfg.scales)?);
    let a_g = holder_value(&estimate_holder_exponent_with(g, &k, cfg.scales)?);
    let swapped = a_g > a_f;
    let (f, g, alpha, beta) = if swapped {
        (g, f, a_g, a_f)
    } else {
        (f, g, a_f, a_g)
    };
    let base = |decision, exponent, reason: Option<String>| ProductAdmissibility {
        decision,
        ledger: Vec::new(),
        exponent,
        alpha,
        beta,
        swapped,
        reason,
        pairwise: None,
    };
    if alpha + beta > margin {
        return Ok(base(Decision::AdmissibleClassical, alpha.min(beta), None));
    }
    let pf = points_of(f);
    let pg = points_of(g);
    let common: Vec<Point> = pf
        .iter()
        .copied()
        .filter(|p| pg.iter().any(|q| distance(p, q, dim) < 1e-9))
        .collect();
    if alpha < 0.0 && beta < 0.0 {
        if common.is_empty() {
            return Ok(base(
                Decision::AdmissibleDisjointSupport,
                alpha + beta,
                None,
            ));
        }
        if f.is_function() && g.is_function() {
            return Ok(base(
                Decision::RequiresExtension,
                f64::NAN,
                Some(
                    "both factors are negative-exponent functions singular at a common point"
                        .into(),
                ),
            ));
        }
        let pw = pairwise_product_criterion(f, g, &common, &default_directions(dim))?;
        let (decision, reason) = match pw.verdict {
            PairVerdict::Pass => (Decision::AdmissibleMicrolocal, None),
            PairVerdict::Fail => (Decision::NotAdmissible, Some("s1*+s2* < 0".to_string())),
            PairVerdict::Inconclusive => (
                Decision::Inconclusive,
                Some("s1*+s2* within margin of 0".to_string()),
            ),
        };
        let mut out = base(
            decision,
            if decision.is_admissible() {
                beta
            } else {
                f64::NAN
            },
            reason,
        );
        out.pairwise = Some(pw);
        return Ok(out);
    }
    let radius = localizer_radius(&all_points, dim);
    let ledger = pg
        .par_iter()
        .map(|x| -> Result<LedgerEntry> {
            let kx = Region::around(dim, x, radius);
            // a smooth localizer does not change Hölder regularity, so `f` is
            // measured directly on the neighbourhood of `x`
            let alpha_local = holder_value(&estimate_holder_exponent_with(f, &kx, cfg.scales)?);
            let gl = localize(g, x, radius)?;
            let kb = Region::around(dim, x, 2.0 * radius);
            let beta_star_local =
                estimate_beta_star_with(&gl, &kb, &cfg.p_samples, cfg.scales)?.value;
            Ok(LedgerEntry {
                x: *x,
                alpha_local,
                beta_star_local,
                margin: alpha_local + beta_star_local,
                localizer_radius: radius,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = ledger
        .iter()
        .map(|e| e.margin)
        .fold(f64::INFINITY, f64::min);
    let (decision, exponent, reason) = if worst > margin {
        (Decision::AdmissibleMicrolocal, beta, None)
    } else if worst >= -margin {
        (
            Decision::Inconclusive,
            f64::NAN,
            Some(format!("ledger margin {worst:.3} within {margin} of 0")),
        )
    } else if beta > -(dim as f64) && beta < 0.0 && f.is_function() && g.is_function() {
        (
            Decision::RequiresExtension,
            f64::NAN,
            Some(format!("ledger margin {worst:.3} < 0")),
        )
    } else {
        (
            Decision::NotAdmissible,
            f64::NAN,
            Some(format!("α + β* = {worst:.3} < 0")),
        )
    };
    let mut out = base(decision, exponent, reason);
    out.ledger = ledger;
    Ok(out)
}

/// Product on disjoint singular supports: pointwise for two functions, the
/// smooth-times-distribution pairing when exactly one factor is a function,
/// and zero for two point distributions at different points.
pub fn disjoint_product(f: &DistributionExpr, g: &DistributionExpr) -> Result<DistributionExpr> {
    match (f.is_function(), g.is_function()) {
        (true, true) => DistributionExpr::pointwise(f, g),
        (true, false) => smooth_times(f, g),
        (false, true) => smooth_times(g, f),
        (false, false) => {
            let points = |u: &DistributionExpr| -> Option<Vec<Point>> {
                match u.kind() {
                    Kind::DiracDelta { center, .. } => Some(vec![*center]),
                    Kind::Sum(t)
                        if t.iter()
                            .all(|(_, v)| matches!(v.kind(), Kind::DiracDelta { .. })) =>
                    {
                        Some(t.iter().flat_map(|(_, v)| points_of(v)).collect())
                    }
                    _ => None,
                }
            };
            match (points(f), points(g)) {
                (Some(a), Some(b))
                    if a.iter()
                        .all(|p| b.iter().all(|q| distance(p, q, f.dim()) > 1e-9)) =>
                {
                    Ok(DistributionExpr::constant(f.dim(), 0.0).with_label("zero"))
                }
                _ => Err(Error::InvalidInput(format!(
                    "no product rule for {} and {} on disjoint supports",
                    f.label(),
                    g.label()
                ))),
            }
        }
    }
}

/// `(f·g)(ψ) = g(f ψ)` for a function-type `f`.
fn smooth_times(f: &DistributionExpr, g: &DistributionExpr) -> Result<DistributionExpr> {
    let cf = f.as_closed_form().ok_or_else(|| {
        Error::RolesUndetermined(format!("{} has no closed form to multiply with", f.label()))
    })?;
    Ok(multiply_by_smooth(g, cf)?.with_label(format!("({})*({})", f.label(), g.label())))
}

/// Builds the product with the roles recorded in `adm`.
pub fn young_product_with(
    f: &DistributionExpr,
    g: &DistributionExpr,
    adm: &ProductAdmissibility,
) -> Result<DistributionExpr> {
    let (f, g) = if adm.swapped { (g, f) } else { (f, g) };
    let reason = || adm.reason.clone().unwrap_or_default();
    match adm.decision {
        Decision::NotAdmissible => Err(Error::NotAdmissible(reason())),
        Decision::Inconclusive => Err(Error::Inconclusive(reason())),
        Decision::RequiresExtension => Err(Error::NotAdmissible(format!(
            "requires extension: {}",
            reason()
        ))),
        Decision::AdmissibleDisjointSupport => disjoint_product(f, g),
        Decision::AdmissibleClassical | Decision::AdmissibleMicrolocal => {
            if f.is_function() && g.is_function() {
                DistributionExpr::pointwise(f, g)
            } else if f.is_function() {
                smooth_times(f, g)
            } else if g.is_function() {
                smooth_times(g, f)
            } else {
                Err(Error::RolesUndetermined(format!(
                    "neither {} nor {} is a function",
                    f.label(),
                    g.label()
                )))
            }
        }
    }
}

/// Checks admissibility and returns `f·g` defined by `(f·g)(ψ) = g(f ψ)`.
pub fn young_product(f: &DistributionExpr, g: &DistributionExpr) -> Result<DistributionExpr> {
    let adm = check_young_microlocal(f, g)?;
    young_product_with(f, g, &adm)
}

/// `‖u‖_{C^γ(K)}`: for `γ < 0` the largest `λ^{-γ} |u(φ^λ_x)|`; for `γ ≥ 0`
/// the sup norm plus the largest `R_k(h)/h^γ` with `k = ⌈γ⌉ - 1`.
pub fn holder_norm(
    u: &DistributionExpr,
    gamma: f64,
    region: &Region,
    range: ScaleRange,
) -> Result<f64> {
    let dim = u.dim();
    if gamma < 0.0 || !u.is_function() {
        let dict = plain_dictionary(dim);
        let mut best = 0.0f64;
        for lam in range.lambdas() {
            best = best.max(lam.powf(-gamma) * lp_over_x(u, &dict, region, lam, f64::INFINITY)?);
        }
        return Ok(best);
    }
    let f = u
        .as_closed_form()
        .ok_or_else(|| Error::InvalidInput(format!("{} is not a pointwise function", u.label())))?;
    let pts = taylor_points(u, region);
    let sup = pts
        .iter()
        .map(|p| f.value(p, dim).abs())
        .fold(0.0, f64::max);
    let k = (gamma.ceil() as usize).saturating_sub(1);
    let hs = range.lambdas();
    let rem = taylor_remainders(&f, dim, &pts, &hs, k).ok_or(Error::InsufficientDerivatives {
        needed: k,
        available: 0,
    })?;
    let semi = rem
        .iter()
        .zip(&hs)
        .map(|(r, h)| r / h.powf(gamma))
        .fold(0.0, f64::max);
    Ok(sup + semi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    /// `c·f`.
    ScaleF(f64),
    /// `f(· - t)`.
    TranslateF(Point),
    /// `λ^{-d} g(·/λ)`.
    DilateG(f64),
}

impl Perturbation {
    pub fn apply(
        &self,
        f: &DistributionExpr,
        g: &DistributionExpr,
    ) -> Result<(DistributionExpr, DistributionExpr)> {
        Ok(match *self {
            Perturbation::ScaleF(c) => (f.scaled(c), g.clone()),
            Perturbation::TranslateF(t) => (f.translated(&t)?, g.clone()),
            Perturbation::DilateG(l) => (f.clone(), g.dilated(l)?),
        })
    }

    pub fn label(&self) -> String {
        match self {
            Perturbation::ScaleF(c) => format!("scale_f:{c}"),
            Perturbation::TranslateF(t) => format!("translate_f:{},{}", t[0], t[1]),
            Perturbation::DilateG(l) => format!("dilate_g:{l}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityInstance {
    pub label: String,
    pub product_norm: f64,
    pub f_norm: f64,
    pub g_norm: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    /// Exponents the norms are taken in.
    pub alpha: f64,
    pub beta: f64,
    pub instances: Vec<ContinuityInstance>,
    pub max_ratio: f64,
    /// `max/min - 1` over the family.
    pub variation: f64,
    /// Ratios increase strictly along the family by more than half in total.
    pub growth_trend: bool,
    pub bounded: bool,
}

/// Exponent used for the `f` norm: smooth or very regular factors are measured in `C^{1.5}`.
const MAX_NORM_EXPONENT: f64 = 1.5;

/// Ratio `‖f·g‖_{C^β(K)} / (‖f‖_{C^α(K̄₁)} ‖g‖_{C^β(K̄₁)})` across a family of
/// perturbed instances, with `α`, `β` estimated once from the unperturbed pair.
pub fn verify_continuity_bound(
    f: &DistributionExpr,
    g: &DistributionExpr,
    region: &Region,
    family: &[Perturbation],
) -> Result<ContinuityReport> {
    let cfg = RunConfig::default();
    let adm = check_young_microlocal_with(f, g, &cfg)?;
    if !adm.decision.is_admissible() {
        return Err(Error::NotAdmissible(
            adm.reason.unwrap_or_else(|| format!("{:?}", adm.decision)),
        ));
    }
    let alpha = adm.alpha.min(MAX_NORM_EXPONENT);
    let beta = adm.beta;
    let outer = region.enlargement(1.0);
    let range = cfg.scales;
    let instances = family
        .iter()
        .map(|pert| -> Result<ContinuityInstance> {
            let (fi, gi) = pert.apply(f, g)?;
            let prod = young_product_with(&fi, &gi, &adm)?;
            let (pf, pg) = if adm.swapped { (&gi, &fi) } else { (&fi, &gi) };
            let product_norm = holder_norm(&prod, beta, region, range)?;
            let f_norm = holder_norm(pf, alpha, &outer, range)?;
            let g_norm = holder_norm(pg, beta, &outer, range)?;
            Ok(ContinuityInstance {
                label: pert.label(),
                product_norm,
                f_norm,
                g_norm,
                ratio: product_norm / (f_norm * g_norm),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = instances.iter().map(|i| i.ratio).collect();
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let variation = if min_ratio > 0.0 {
        max_ratio / min_ratio - 1.0
    } else {
        f64::INFINITY
    };
    let growth_trend = ratios.len() > 1
        && ratios.windows(2).all(|w| w[1] > w[0])
        && ratios[ratios.len() - 1] > 1.5 * ratios[0];
    Ok(ContinuityReport {
        alpha,
        beta,
        instances,
        max_ratio,
        variation,
        growth_trend,
        bounded: max_ratio.is_finite() && !growth_trend,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::ClosedForm;

    #[test]
    fn classical_examples() {
        let c = check_young_classical(0.6, -0.5);
        assert!(c.admissible && c.exponent == -0.5);
        assert!(!check_young_classical(1.0, -1.0).admissible);
        assert!(!check_young_classical(-0.2, -0.3).admissible);
    }

    #[test]
    fn delta_times_delta_is_rejected_by_wavefront() {
        let d = DistributionExpr::delta(1, [0.0, 0.0]);
        let a = check_young_microlocal(&d, &d).unwrap();
        assert_eq!(a.decision, Decision::NotAdmissible);
        assert_eq!(a.reason.as_deref(), Some("s1*+s2* < 0"));
    }

    #[test]
    fn disjoint_deltas_multiply_to_zero() {
        let a = DistributionExpr::delta(1, [0.0, 0.0]);
        let b = DistributionExpr::delta(1, [0.5, 0.0]);
        let adm = check_young_microlocal(&a, &b).unwrap();
        assert_eq!(adm.decision, Decision::AdmissibleDisjointSupport);
        assert!((adm.exponent + 2.0).abs() < 0.1);
        let p = young_product_with(&a, &b, &adm).unwrap();
        let phi = crate::testfn::make_bump(1, 1.0, 2);
        assert_eq!(p.pair(&phi).unwrap(), 0.0);
    }

    #[test]
    fn constant_times_delta_is_classical() {
        let one = DistributionExpr::constant(1, 1.0);
        let d = DistributionExpr::delta(1, [0.0, 0.0]);
        let adm = check_young_microlocal(&d, &one).unwrap();
        assert_eq!(adm.decision, Decision::AdmissibleClassical);
        assert!(adm.swapped);
        let p = young_product_with(&d, &one, &adm).unwrap();
        let phi = crate::testfn::make_bump(1, 0.7, 2);
        assert!((p.pair(&phi).unwrap() - d.pair(&phi).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn white_noise_is_rejected() {
        let w = DistributionExpr::white_noise(1, 256, 3).unwrap();
        let a = check_young_microlocal(&w, &w).unwrap();
        assert_eq!(a.decision, Decision::NotAdmissible);
        assert_eq!(a.reason.as_deref(), Some("singular support everywhere"));
    }

    #[test]
    fn scaling_f_keeps_the_ratio() {
        let f = DistributionExpr::smooth(
            1,
            ClosedForm::cusp([0.0, 0.0], 1.0).plus(ClosedForm::constant(1.0)),
        );
        let d = DistributionExpr::delta(1, [0.0, 0.0]);
        let fam: Vec<Perturbation> = [1.0, 2.0, 4.0, 8.0]
            .iter()
            .map(|c| Perturbation::ScaleF(*c))
            .collect();
        let r = verify_continuity_bound(&f, &d, &Region::cube(1, -0.5, 0.5), &fam).unwrap();
        assert!(r.variation < 0.05, "{r:?}");
        assert!(r.bounded);
    }
}
