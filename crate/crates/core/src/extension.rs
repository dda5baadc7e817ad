//! Scaling degrees at a point and extensions of distributions across it.
//!
//! An extension of `t` from `R^d \ {x₀}` is `t ∘ W + Σ a_α ∂^α δ_{x₀}`, where
//! `W φ = φ - Σ_{|α| ≤ ρ} ∂^α φ(x₀) ψ_α` removes the jet of `φ` at `x₀` and
//! `ρ = sd - d`. The functions `ψ_α` satisfy `∂^β ψ_α(x₀) = δ^β_α`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::closed_form::ClosedForm;
use crate::config::{ext_f64, RunConfig};
use crate::error::{Error, Result};
use crate::fit::{fit_line, fit_log_corrected};
use crate::jet::{factorial, multi_indices, MultiIndex};
use crate::kernels::DistributionExpr;
use crate::product::{
    check_young_microlocal_with, young_product_with, Decision, ProductAdmissibility,
};
use crate::region::{distance, Point};
use crate::scan::ScaleRange;
use crate::testfn::{plain_dictionary, TestFunction};

/// Distance to an integer below which `ρ` is treated as that integer.
pub const INTEGER_SNAP: f64 = 0.1;

/// Radius of the bump carrying the jet functions `ψ_α`.
pub const JET_BUMP_RADIUS: f64 = 0.5;

/// Offset and radius of the annular probes used when centred pairings diverge.
const ANNULAR_OFFSET: f64 = 0.5;
const ANNULAR_RADIUS: f64 = 0.25;

/// Offset and radius of the off-centre probes, which cover `x₀` without being
/// even about it so odd kernels such as `δ'` are seen.
const SHIFTED_OFFSET: f64 = 0.25;
const SHIFTED_RADIUS: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingDegreeEstimate {
    pub x0: Point,
    /// `-slope` of `log2 max_f |t(f^λ_{x₀})|` against `log2 λ`.
    #[serde(with = "ext_f64")]
    pub value: f64,
    pub stderr: f64,
    pub samples: Vec<(f64, f64)>,
    pub residual: f64,
    /// Slope of the fit with a `log(1/λ)` power term, when it could be formed.
    #[serde(default, with = "ext_f64")]
    pub log_corrected: f64,
}

fn axis_offsets(dim: usize, d: f64) -> Vec<Point> {
    if dim == 1 {
        vec![[d, 0.0], [-d, 0.0]]
    } else {
        vec![[d, 0.0], [-d, 0.0], [0.0, d], [0.0, -d]]
    }
}

/// Probes for scaling degrees: the centred dictionary, off-centre bumps
/// covering `x₀`, and annular bumps avoiding `x₀`, which keep the pairings
/// finite when `t` is not locally integrable.
pub fn scaling_probes(dim: usize) -> Vec<TestFunction> {
    let mut out = plain_dictionary(dim);
    let shrink = if dim == 1 {
        1.0
    } else {
        std::f64::consts::FRAC_1_SQRT_2
    };
    let amp = std::f64::consts::E.powi(dim as i32);
    for (d, r) in [
        (SHIFTED_OFFSET, SHIFTED_RADIUS),
        (ANNULAR_OFFSET, ANNULAR_RADIUS),
    ] {
        for c in axis_offsets(dim, d) {
            out.push(TestFunction::bump_at(dim, c, r * shrink, 1.0, amp));
        }
    }
    out
}

pub fn scaling_degree(t: &DistributionExpr, x0: &Point) -> Result<ScalingDegreeEstimate> {
    scaling_degree_with(t, x0, ScaleRange::default())
}

/// Probes on which `t` diverges are skipped, as are vanishing pairings. All
/// pairings vanishing gives `sd = -∞`; growth faster than any power of
/// `1/λ` gives [`Error::NoExtension`].
pub fn scaling_degree_with(
    t: &DistributionExpr,
    x0: &Point,
    range: ScaleRange,
) -> Result<ScalingDegreeEstimate> {
    let probes = scaling_probes(t.dim());
    let lambdas = range.lambdas();
    let mut mags = Vec::with_capacity(lambdas.len());
    for &lam in &lambdas {
        let mut m = 0.0f64;
        for phi in &probes {
            match t.pair_scaled(phi, x0, lam) {
                Ok(v) => m = m.max(v.abs()),
                Err(Error::NonIntegrableSingularity { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        mags.push(m);
    }
    if mags.iter().all(|m| *m == 0.0) {
        return Ok(ScalingDegreeEstimate {
            x0: *x0,
            value: f64::NEG_INFINITY,
            stderr: 0.0,
            samples: Vec::new(),
            residual: 0.0,
            log_corrected: f64::NEG_INFINITY,
        });
    }
    if mags.iter().any(|m| !m.is_finite()) {
        return Err(Error::NoExtension("pairings overflow under scaling".into()));
    }
    let samples: Vec<(f64, f64)> = lambdas
        .iter()
        .zip(&mags)
        .filter(|(_, m)| **m > 0.0)
        .map(|(l, m)| (l.log2(), m.log2()))
        .collect();
    if samples.len() < 5 {
        return Err(Error::InsufficientResolution {
            usable: samples.len(),
            required: 5,
        });
    }
    // growth that keeps steepening has no finite degree
    let d: Vec<f64> = samples
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .collect();
    if d.len() >= 4 && d[d.len() - 1].min(d[d.len() - 2]) < 0.5 * (d[0] + d[1]) - 4.0 {
        return Err(Error::NoExtension("scaling degree is infinite".into()));
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let fit = fit_line(&xs, &ys)?;
    let log_corrected = fit_log_corrected(&xs, &ys)
        .map(|f| -f.slope)
        .unwrap_or(f64::NAN);
    Ok(ScalingDegreeEstimate {
        x0: *x0,
        value: -fit.slope,
        stderr: fit.stderr,
        samples,
        residual: fit.residual,
        log_corrected,
    })
}

/// A one-point extension family `t ∘ W + Σ a_α ∂^α δ_{x₀}`.
#[derive(Debug, Clone)]
pub struct ExtensionFamily {
    pub x0: Point,
    pub dim: usize,
    pub scaling_degree: ScalingDegreeEstimate,
    /// `sd - d`.
    pub rho: f64,
    /// Largest `|α|` in the counterterms; `None` when the extension is unique.
    pub order: Option<usize>,
    pub unique: bool,
    /// `ρ` lies within [`INTEGER_SNAP`] of an integer.
    pub boundary_warning: bool,
    pub coeffs: Vec<(MultiIndex, f64)>,
    /// Regularity of the extended product, for families built from products.
    pub result_exponent: Option<f64>,
    /// The product needed no extension and was built directly.
    pub via_young_product: bool,
    base: DistributionExpr,
    jets: Vec<(MultiIndex, TestFunction)>,
}

/// Serializable summary of a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionDescriptor {
    pub kernel: String,
    pub x0: Point,
    pub scaling_degree: ScalingDegreeEstimate,
    #[serde(with = "ext_f64")]
    pub rho: f64,
    pub order: Option<usize>,
    pub unique: bool,
    pub boundary_warning: bool,
    pub free_coefficients: Vec<(MultiIndex, f64)>,
    pub result_exponent: Option<f64>,
    pub via_young_product: bool,
    pub member: String,
}

impl ExtensionFamily {
    /// The member with the stored coefficients.
    pub fn member(&self) -> DistributionExpr {
        self.member_with(&self.coeffs)
    }

    /// The member with all `a_α = 0`.
    pub fn base_member(&self) -> DistributionExpr {
        self.member_with(&[])
    }

    pub fn member_with(&self, coeffs: &[(MultiIndex, f64)]) -> DistributionExpr {
        if self.unique {
            return self.base.clone();
        }
        DistributionExpr::renormalized(&self.base, self.x0, self.jets.clone(), coeffs.to_vec())
    }

    /// Replaces the stored coefficients; indices must be free.
    pub fn with_coeffs(mut self, coeffs: Vec<(MultiIndex, f64)>) -> Result<Self> {
        let free = self.free_indices();
        if let Some((k, _)) = coeffs.iter().find(|(k, _)| !free.contains(k)) {
            return Err(Error::InvalidInput(format!(
                "coefficient for ∂^{:?} is not free (ρ = {:.3})",
                &k[..self.dim],
                self.rho
            )));
        }
        self.coeffs = coeffs;
        Ok(self)
    }

    /// Multi-indices `|α| ≤ ρ` carrying free coefficients.
    pub fn free_indices(&self) -> Vec<MultiIndex> {
        self.jets.iter().map(|(k, _)| *k).collect()
    }

    /// The functions `ψ_α`.
    pub fn jet_functions(&self) -> &[(MultiIndex, TestFunction)] {
        &self.jets
    }

    /// `W φ`.
    pub fn apply_w(&self, phi: &TestFunction) -> Result<TestFunction> {
        let mut terms = vec![(1.0, phi.clone())];
        for (k, psi) in &self.jets {
            terms.push((-phi.partial(&self.x0, *k)?, psi.clone()));
        }
        Ok(TestFunction::combination(terms))
    }

    /// Scaling degree of the stored member; log-corrected when counterterms are present.
    pub fn reestimate_scaling_degree(&self) -> Result<f64> {
        let sd = scaling_degree(&self.member(), &self.x0)?;
        Ok(if self.unique || !sd.log_corrected.is_finite() {
            sd.value
        } else {
            sd.log_corrected
        })
    }

    pub fn descriptor(&self) -> ExtensionDescriptor {
        ExtensionDescriptor {
            kernel: self.base.label().to_string(),
            x0: self.x0,
            scaling_degree: self.scaling_degree.clone(),
            rho: self.rho,
            order: self.order,
            unique: self.unique,
            boundary_warning: self.boundary_warning,
            free_coefficients: self.coeffs.clone(),
            result_exponent: self.result_exponent,
            via_young_product: self.via_young_product,
            member: self.member().label().to_string(),
        }
    }
}

/// `ψ_α` for `|α| ≤ order`: `(y - x₀)^α/α! · b` with `b` a bump equal to one at
/// `x₀`, recombined by the inverse of `M[β][α] = ∂^β((y - x₀)^α b/α!)(x₀)` so
/// that `∂^β ψ_α(x₀) = δ^β_α`.
pub fn jet_functions(
    dim: usize,
    x0: &Point,
    order: usize,
) -> Result<Vec<(MultiIndex, TestFunction)>> {
    let radius = if dim == 1 {
        JET_BUMP_RADIUS
    } else {
        JET_BUMP_RADIUS / std::f64::consts::SQRT_2
    };
    let bump = TestFunction::bump_at(dim, *x0, radius, 1.0, std::f64::consts::E.powi(dim as i32));
    let idx = multi_indices(dim, order);
    let raw: Vec<TestFunction> = idx
        .iter()
        .map(|a| {
            let w = ClosedForm::Monomial {
                center: *x0,
                powers: *a,
            };
            bump.weighted(w)
                .scaled_by(1.0 / (factorial(a[0]) * factorial(a[1])))
        })
        .collect();
    let n = idx.len();
    let mut m = DMatrix::zeros(n, n);
    for (i, b) in idx.iter().enumerate() {
        for (j, f) in raw.iter().enumerate() {
            m[(i, j)] = f.partial(x0, *b)?;
        }
    }
    let inv = m
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidInput("jet matrix is singular".into()))?;
    let check = &m * &inv - DMatrix::identity(n, n);
    if check.amax() > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "jet correction residual {:e}",
            check.amax()
        )));
    }
    Ok(idx
        .iter()
        .enumerate()
        .map(|(j, a)| {
            let terms: Vec<(f64, TestFunction)> = raw
                .iter()
                .enumerate()
                .filter(|(i, _)| inv[(*i, j)] != 0.0)
                .map(|(i, f)| (inv[(i, j)], f.clone()))
                .collect();
            (*a, TestFunction::combination(terms))
        })
        .collect())
}

/// `floor(ρ)` with values just below an integer snapped up, and whether `ρ` is near an integer.
fn counterterm_order(rho: f64) -> (Option<usize>, bool) {
    let near = (rho - rho.round()).abs() < INTEGER_SNAP;
    let k = (rho + INTEGER_SNAP).floor();
    (if k < 0.0 { None } else { Some(k as usize) }, near)
}

pub fn extend(
    t: &DistributionExpr,
    x0: &Point,
    coeffs: Option<Vec<(MultiIndex, f64)>>,
) -> Result<ExtensionFamily> {
    let sd = scaling_degree(t, x0)?;
    extend_with_degree(t, x0, sd, coeffs)
}

fn extend_with_degree(
    t: &DistributionExpr,
    x0: &Point,
    sd: ScalingDegreeEstimate,
    coeffs: Option<Vec<(MultiIndex, f64)>>,
) -> Result<ExtensionFamily> {
    let dim = t.dim();
    let rho = sd.value - dim as f64;
    let (order, boundary_warning) = counterterm_order(rho);
    let jets = match order {
        Some(k) => jet_functions(dim, x0, k)?,
        None => Vec::new(),
    };
    let free: Vec<MultiIndex> = jets.iter().map(|(k, _)| *k).collect();
    let coeffs = match coeffs {
        None => free.iter().map(|k| (*k, 0.0)).collect(),
        Some(c) => {
            if let Some((k, _)) = c.iter().find(|(k, _)| !free.contains(k)) {
                return Err(Error::InvalidInput(format!(
                    "coefficient for ∂^{:?} is not free (ρ = {rho:.3})",
                    &k[..dim]
                )));
            }
            c
        }
    };
    Ok(ExtensionFamily {
        x0: *x0,
        dim,
        scaling_degree: sd,
        rho,
        order,
        unique: order.is_none(),
        boundary_warning,
        coeffs,
        result_exponent: None,
        via_young_product: false,
        base: t.clone(),
        jets,
    })
}

fn common_points(f: &DistributionExpr, g: &DistributionExpr) -> Result<Vec<Point>> {
    let (Some(a), Some(b)) = (f.singular_support().points(), g.singular_support().points()) else {
        return Err(Error::NotAdmissible("singular support everywhere".into()));
    };
    Ok(a.iter()
        .copied()
        .filter(|p| b.iter().any(|q| distance(p, q, f.dim()) < 1e-9))
        .collect())
}

pub fn multiply_and_extend(f: &DistributionExpr, g: &DistributionExpr) -> Result<ExtensionFamily> {
    multiply_and_extend_with(f, g, &RunConfig::default())
}

/// Products that need no extension are built directly and wrapped as a unique
/// family. Otherwise the pointwise product off the common singular point is
/// extended across it.
pub fn multiply_and_extend_with(
    f: &DistributionExpr,
    g: &DistributionExpr,
    cfg: &RunConfig,
) -> Result<ExtensionFamily> {
    let adm = check_young_microlocal_with(f, g, cfg)?;
    let functions = f.is_function() && g.is_function();
    match adm.decision {
        d if d.is_admissible() => {
            let p = young_product_with(f, g, &adm)?;
            let x0 = common_points(f, g)?.first().copied().unwrap_or([0.0; 2]);
            let sd = scaling_degree_with(&p, &x0, cfg.scales)?;
            let mut fam = extend_with_degree(&p, &x0, sd, None)?;
            // an admissible product is already a distribution on the whole space
            fam.unique = true;
            fam.order = None;
            fam.jets.clear();
            fam.coeffs.clear();
            fam.via_young_product = true;
            fam.result_exponent = Some(adm.exponent);
            return Ok(fam);
        }
        Decision::RequiresExtension => {}
        Decision::Inconclusive if functions => {}
        _ => {
            return Err(Error::NotAdmissible(
                adm.reason
                    .clone()
                    .unwrap_or_else(|| format!("{:?}", adm.decision)),
            ))
        }
    }
    let common = common_points(f, g)?;
    match common.len() {
        0 => {
            return Err(Error::InvalidInput(
                "no common singular point; the product needs no extension".into(),
            ))
        }
        1 => {}
        n => return Err(Error::MultiplePoints(n)),
    }
    let x0 = common[0];
    let product = DistributionExpr::pointwise(f, g)?;
    let sd = scaling_degree_with(&product, &x0, cfg.scales)?;
    let mut fam = extend_with_degree(&product, &x0, sd, None)?;
    fam.result_exponent = Some(result_exponent(&adm));
    Ok(fam)
}

/// `β` when the smoother factor is positive, `α + β` when both are negative.
fn result_exponent(adm: &ProductAdmissibility) -> f64 {
    if adm.alpha > 0.0 {
        adm.beta
    } else {
        adm.alpha + adm.beta
    }
}
