//! Estimators for the local Hölder exponent, `β*`, and the local Sobolev exponent.
//!
//! All exponents are least-squares slopes in `log2` coordinates. Scaled pairings
//! are reduced to one magnitude per scale (sup over the dictionary, then a
//! norm in `x`) before a single line is fitted.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::ClosedForm;
use crate::config::ext_f64;
use crate::error::{Error, Result};
use crate::fit::{fit_line, LineFit};
use crate::grid::{render_spectrum, PeriodicGrid};
use crate::jet::{factorial, multi_indices};
use crate::kernels::{multiply_by_smooth, DistributionExpr};
use crate::region::{Point, Region};
use crate::scan::{
    log_samples, lp_norms_over_x, lp_over_x, relevant_singular_points, sup_samples, ScaleRange,
};
use crate::testfn::{moment_free_dictionary, plain_dictionary, TestFunction};

/// Slope tolerance used when deciding between branches and orders.
pub const SLOPE_EPS: f64 = 0.05;

/// Highest Taylor order probed by the positive branch.
pub const MAX_TAYLOR_ORDER: usize = 4;

/// Minimum number of scales in a fit.
pub const MIN_SCALES: usize = 5;

/// Localizer radius for spectral estimates.
pub const LOCALIZER_RADIUS: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportKind {
    Holder,
    BetaStar,
    Sobolev,
    ScalingDegree,
}

/// `γ̂(p)` for one integrability index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PRow {
    #[serde(with = "ext_f64")]
    pub p: f64,
    pub gamma: f64,
    pub stderr: f64,
    pub samples: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub kind: ReportKind,
    /// Estimated exponent; `inf` when no finite exponent is visible.
    #[serde(with = "ext_f64")]
    pub value: f64,
    pub stderr: f64,
    /// `(log2 scale, log2 magnitude)` for scales, `(log2 |ξ|, log2 energy)` for spectra.
    pub samples: Vec<(f64, f64)>,
    pub region: Region,
    /// RMS residual of the fit.
    pub residual: f64,
    /// Set when the data only bound the exponent from below.
    pub smooth: bool,
    /// Which estimator produced the value.
    pub branch: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_table: Option<Vec<PRow>>,
}

impl RegularityReport {
    /// `scale,magnitude` rows (`frequency,energy` for spectral reports), one
    /// block per `p` when a table is present.
    pub fn to_csv(&self) -> String {
        let head = if self.kind == ReportKind::Sobolev {
            "frequency,energy"
        } else {
            "scale,magnitude"
        };
        let mut out = String::new();
        let mut block = |p: Option<f64>, samples: &[(f64, f64)]| {
            for (x, y) in samples {
                if let Some(p) = p {
                    out.push_str(&format!(
                        "{},",
                        ext_f64::to_repr(p)
                            .map(str::to_string)
                            .unwrap_or(p.to_string())
                    ));
                }
                out.push_str(&format!("{:e},{:e}\n", x.exp2(), y.exp2()));
            }
        };
        match &self.p_table {
            Some(rows) => {
                for r in rows {
                    block(Some(r.p), &r.samples);
                }
                format!("p,{head}\n{out}")
            }
            None => {
                block(None, &self.samples);
                format!("{head}\n{out}")
            }
        }
    }
}

fn fit_samples(samples: &[(f64, f64)]) -> Result<LineFit> {
    if samples.len() < MIN_SCALES {
        return Err(Error::InsufficientResolution {
            usable: samples.len(),
            required: MIN_SCALES,
        });
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1).collect();
    fit_line(&xs, &ys)
}

/// `sup_x sup_φ |u(φ^λ_x)|` per scale.
pub fn sup_magnitudes(
    u: &DistributionExpr,
    dict: &[TestFunction],
    region: &Region,
    range: ScaleRange,
) -> Result<Vec<f64>> {
    range
        .lambdas()
        .into_iter()
        .map(|lam| lp_over_x(u, dict, region, lam, f64::INFINITY))
        .collect()
}

pub fn estimate_holder_exponent(u: &DistributionExpr, region: &Region) -> Result<RegularityReport> {
    estimate_holder_exponent_with(u, region, ScaleRange::default())
}

/// Negative branch on scaled pairings; when the slope is not negative the
/// estimate moves to Taylor remainders of the pointwise function.
pub fn estimate_holder_exponent_with(
    u: &DistributionExpr,
    region: &Region,
    range: ScaleRange,
) -> Result<RegularityReport> {
    let dim = u.dim();
    // locally bounded closed forms have nonnegative exponents
    if u.as_closed_form().is_some() && u.local_exponents().iter().all(|(_, e)| *e >= 0.0) {
        let mut r = taylor_branch(u, region, range)?;
        // closed forms declare every singular point; with none the function is C^∞
        // and a finite slope only reflects pre-asymptotic scales
        if u.local_exponents().is_empty() && !r.smooth {
            r.value = f64::INFINITY;
            r.smooth = true;
            r.branch.push_str("_no_singular_points");
        }
        return Ok(r);
    }
    let mut dict = plain_dictionary(dim);
    dict.extend(moment_free_dictionary(dim, 0));
    let lambdas = range.lambdas();
    let mags = sup_magnitudes(u, &dict, region, range)?;
    let samples = log_samples(&lambdas, &mags);
    let fit = fit_samples(&samples)?;
    if fit.slope < -SLOPE_EPS || u.as_closed_form().is_none() {
        return Ok(RegularityReport {
            kind: ReportKind::Holder,
            value: fit.slope,
            stderr: fit.stderr,
            samples,
            region: region.clone(),
            residual: fit.residual,
            smooth: false,
            branch: "scaled_pairings".into(),
            p_table: None,
        });
    }
    taylor_branch(u, region, range)
}

/// Sample directions for Taylor remainders.
fn directions(dim: usize) -> Vec<Point> {
    if dim == 1 {
        vec![[1.0, 0.0], [-1.0, 0.0]]
    } else {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        vec![
            [1.0, 0.0],
            [-1.0, 0.0],
            [0.0, 1.0],
            [0.0, -1.0],
            [s, s],
            [-s, -s],
            [s, -s],
            [-s, s],
        ]
    }
}

/// Base points for Taylor remainders: the sup-norm grid plus singular points.
pub(crate) fn taylor_points(u: &DistributionExpr, region: &Region) -> Vec<Point> {
    let mut pts = region.grid_samples(sup_samples(u.dim()));
    pts.extend(
        relevant_singular_points(u, region)
            .into_iter()
            .filter(|p| region.contains(p)),
    );
    pts
}

/// `sup_x |f(x + h e) - P^k_x(x + h e)|` per offset `h`; `None` if some jet of order `k` is missing.
pub(crate) fn taylor_remainders(
    f: &ClosedForm,
    dim: usize,
    pts: &[Point],
    hs: &[f64],
    k: usize,
) -> Option<Vec<f64>> {
    let dirs = directions(dim);
    let per_point: Option<Vec<Vec<f64>>> = pts
        .par_iter()
        .map(|x| {
            let jet = f.jet(x, dim, k).ok()?;
            let mut out = vec![0.0f64; hs.len()];
            for (o, &h) in out.iter_mut().zip(hs) {
                for e in &dirs {
                    let y = [x[0] + h * e[0], x[1] + h * e[1]];
                    let mut taylor = 0.0;
                    for m in multi_indices(dim, k) {
                        let mono = (h * e[0]).powi(m[0] as i32) * (h * e[1]).powi(m[1] as i32);
                        taylor += jet.get(m) * mono / (factorial(m[0]) * factorial(m[1]));
                    }
                    *o = o.max((f.value(&y, dim) - taylor).abs());
                }
            }
            Some(out)
        })
        .collect();
    let per_point = per_point?;
    Some(
        (0..hs.len())
            .map(|i| per_point.iter().map(|r| r[i]).fold(0.0, f64::max))
            .collect(),
    )
}

fn taylor_branch(
    u: &DistributionExpr,
    region: &Region,
    range: ScaleRange,
) -> Result<RegularityReport> {
    let dim = u.dim();
    let f = u
        .as_closed_form()
        .ok_or_else(|| Error::InvalidInput("not a pointwise function".into()))?;
    let pts = taylor_points(u, region);
    let hs = range.lambdas();
    let scale = pts
        .iter()
        .map(|p| f.value(p, dim).abs())
        .fold(0.0, f64::max)
        .max(1e-300);
    let mut last: Option<RegularityReport> = None;
    for k in 0..=MAX_TAYLOR_ORDER {
        let Some(rem) = taylor_remainders(&f, dim, &pts, &hs, k) else {
            // derivatives of order k are missing somewhere: the previous order stands
            break;
        };
        // remainders at round-off level carry no information
        let kept: Vec<f64> = rem
            .iter()
            .map(|r| if *r <= 1e-12 * scale { 0.0 } else { *r })
            .collect();
        let samples = log_samples(&hs, &kept);
        if samples.len() < MIN_SCALES {
            return Ok(RegularityReport {
                kind: ReportKind::Holder,
                value: f64::INFINITY,
                stderr: 0.0,
                samples,
                region: region.clone(),
                residual: 0.0,
                smooth: true,
                branch: format!("taylor_order_{k}"),
                p_table: None,
            });
        }
        let fit = fit_samples(&samples)?;
        let saturated = fit.slope >= (k + 1) as f64 - SLOPE_EPS;
        let report = RegularityReport {
            kind: ReportKind::Holder,
            value: fit.slope,
            stderr: fit.stderr,
            samples,
            region: region.clone(),
            residual: fit.residual,
            smooth: saturated && k == MAX_TAYLOR_ORDER,
            branch: format!("taylor_order_{k}"),
            p_table: None,
        };
        if !saturated {
            return Ok(report);
        }
        last = Some(report);
    }
    last.ok_or(Error::InsufficientDerivatives {
        needed: 0,
        available: 0,
    })
}

pub fn estimate_beta_star(
    g: &DistributionExpr,
    region: &Region,
    p_samples: &[f64],
) -> Result<RegularityReport> {
    estimate_beta_star_with(g, region, p_samples, ScaleRange::default())
}

/// `min(0, max_p γ̂(p))` with `γ̂(p)` the slope of `‖sup_φ |g(φ^λ_x)|‖_{L^p(K)}` in `λ`.
pub fn estimate_beta_star_with(
    g: &DistributionExpr,
    region: &Region,
    p_samples: &[f64],
    range: ScaleRange,
) -> Result<RegularityReport> {
    if p_samples.is_empty() || p_samples.iter().any(|p| p.is_nan() || *p < 2.0) {
        return Err(Error::InvalidInput("p samples must lie in [2, ∞]".into()));
    }
    let dict = plain_dictionary(g.dim());
    let lambdas = range.lambdas();
    let norms = lambdas
        .iter()
        .map(|&lam| lp_norms_over_x(g, &dict, region, lam, p_samples))
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let mut table = Vec::new();
    for (i, &p) in p_samples.iter().enumerate() {
        let mags: Vec<f64> = norms.iter().map(|n| n[i]).collect();
        let samples = log_samples(&lambdas, &mags);
        let fit = fit_samples(&samples)?;
        table.push((
            fit,
            PRow {
                p,
                gamma: fit.slope,
                stderr: fit.stderr,
                samples,
            },
        ));
    }
    let (best_fit, best) = table
        .iter()
        .max_by(|a, b| a.1.gamma.total_cmp(&b.1.gamma))
        .map(|(f, r)| (*f, r.clone()))
        .expect("non-empty p grid");
    Ok(RegularityReport {
        kind: ReportKind::BetaStar,
        value: best.gamma.min(0.0),
        stderr: best.stderr,
        samples: best.samples.clone(),
        region: region.clone(),
        residual: best_fit.residual,
        smooth: false,
        branch: format!(
            "p={}",
            ext_f64::to_repr(best.p).map_or(best.p.to_string(), str::to_string)
        ),
        p_table: Some(table.into_iter().map(|t| t.1).collect()),
    })
}

/// Shell energies `Σ_{2^j ≤ |ξ| < 2^{j+1}} |widehat(φu)|^2` with per-shell weights.
pub(crate) fn shell_energies(
    spectrum: &[num_complex::Complex64],
    grid: &PeriodicGrid,
    weight: impl Fn(&Point) -> f64 + Sync,
) -> Vec<(u32, f64)> {
    let top = (grid.nyquist().log2().floor() as u32).saturating_sub(1);
    let mut out = vec![0.0f64; top as usize + 1];
    for (idx, s) in spectrum.iter().enumerate() {
        let r = grid.xi_norm(idx);
        if r < 1.0 {
            continue;
        }
        let j = r.log2().floor() as usize;
        if j < out.len() {
            out[j] += s.norm_sqr() * weight(&grid.xi(idx));
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(j, e)| (j as u32, e))
        .collect()
}

/// First shell used in spectral fits. Coarser shells hold few modes and, in
/// 1D, still carry the localizer's own spectrum.
pub fn first_shell(dim: usize) -> u32 {
    if dim == 1 {
        6
    } else {
        4
    }
}

/// Relative energy below which spectra count as exhausted.
pub const SPECTRAL_FLOOR: f64 = 1e-20;

/// Steepening of the per-shell log slope that marks super-polynomial decay.
pub const SPECTRAL_STEEPENING: f64 = 4.0;

/// True when the `log2` energies fall off faster than any power: either they
/// reach the floor, or the decay rate over the last shells exceeds the rate
/// over the first ones by more than [`SPECTRAL_STEEPENING`].
pub(crate) fn super_polynomial(energies: &[f64]) -> bool {
    let top = energies.iter().copied().fold(0.0, f64::max);
    if top == 0.0 || energies.iter().any(|e| *e <= SPECTRAL_FLOOR * top) {
        return true;
    }
    if energies.len() < 5 {
        return false;
    }
    let logs: Vec<f64> = energies.iter().map(|e| e.log2()).collect();
    let d: Vec<f64> = logs.windows(2).map(|w| w[1] - w[0]).collect();
    let early = 0.5 * (d[0] + d[1]);
    let late = d[d.len() - 1].min(d[d.len() - 2]);
    late < early - SPECTRAL_STEEPENING
}

/// Localize `u` by a unit bump of the given radius at `x`.
pub fn localize(u: &DistributionExpr, x: &Point, radius: f64) -> Result<DistributionExpr> {
    let r = if u.dim() == 2 {
        radius / std::f64::consts::SQRT_2
    } else {
        radius
    };
    multiply_by_smooth(u, ClosedForm::unit_bump(*x, r, u.dim()))
}

pub fn estimate_local_sobolev(u: &DistributionExpr, x: &Point) -> Result<RegularityReport> {
    estimate_local_sobolev_with(u, x, &PeriodicGrid::standard(u.dim()), LOCALIZER_RADIUS)
}

/// `ŝ = -σ/2` where `σ` is the slope of `log2` shell energies of the localized
/// spectrum: `|widehat(φu)| ~ |ξ|^{-r}` gives shell energies `~ 2^{j(d - 2r)}` and
/// the weighted integral is finite exactly for `s < r - d/2 = -σ/2`.
pub fn estimate_local_sobolev_with(
    u: &DistributionExpr,
    x: &Point,
    grid: &PeriodicGrid,
    radius: f64,
) -> Result<RegularityReport> {
    let v = localize(u, x, radius)?;
    let spec = render_spectrum(&v, grid)?;
    let shells = shell_energies(&spec, grid, |_| 1.0);
    let region = Region::around(u.dim(), x, radius);
    let used: Vec<(u32, f64)> = shells
        .into_iter()
        .filter(|(j, _)| *j >= first_shell(u.dim()))
        .collect();
    let energies: Vec<f64> = used.iter().map(|s| s.1).collect();
    let samples: Vec<(f64, f64)> = used
        .iter()
        .filter(|s| s.1 > 0.0)
        .map(|(j, e)| (*j as f64, e.log2()))
        .collect();
    if super_polynomial(&energies) {
        return Ok(RegularityReport {
            kind: ReportKind::Sobolev,
            value: f64::INFINITY,
            stderr: 0.0,
            samples,
            region,
            residual: 0.0,
            smooth: true,
            branch: "super_polynomial_decay".into(),
            p_table: None,
        });
    }
    let fit = fit_samples(&samples)?;
    Ok(RegularityReport {
        kind: ReportKind::Sobolev,
        value: -fit.slope / 2.0,
        stderr: fit.stderr / 2.0,
        samples,
        region,
        residual: fit.residual,
        smooth: false,
        branch: "shell_energy".into(),
        p_table: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn holder_of_delta_and_cusp() {
        let k = Region::cube(1, -0.5, 0.5);
        let r = estimate_holder_exponent(&DistributionExpr::delta(1, [0.0, 0.0]), &k).unwrap();
        assert!((r.value + 1.0).abs() < 0.1, "{}", r.value);
        let cusp = DistributionExpr::smooth(1, ClosedForm::cusp([0.0, 0.0], 0.6));
        let r = estimate_holder_exponent(&cusp, &k).unwrap();
        assert!((r.value - 0.6).abs() < 0.1, "{}", r.value);
        assert_eq!(r.branch, "taylor_order_0");
    }

    #[test]
    fn constant_is_smooth() {
        let r = estimate_holder_exponent(
            &DistributionExpr::constant(1, 1.0),
            &Region::cube(1, -0.5, 0.5),
        )
        .unwrap();
        assert!(r.smooth);
    }

    #[test]
    fn sobolev_of_delta() {
        let r =
            estimate_local_sobolev(&DistributionExpr::delta(1, [0.0, 0.0]), &[0.0, 0.0]).unwrap();
        assert!((r.value + 0.5).abs() < 0.1, "{}", r.value);
        let b = estimate_local_sobolev(&DistributionExpr::constant(1, 1.0), &[0.0, 0.0]).unwrap();
        assert!(b.smooth && b.value.is_infinite());
    }
}
