//! Sobolev wavefront sets from cone-restricted spectral energies.
//!
//! `u` is localized by a bump at `x`, rendered on the periodic grid, and the
//! energy `Σ ⟨ξ⟩^{2s} |widehat(φu)(ξ)|^2` is summed per dyadic shell inside a
//! cone. The sum over all of `Γ` is finite when the shell sums decay, so the
//! tail slope of `log2` shell sums is the finiteness diagnostic.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ext_f64;
use crate::dyadic::TAIL_EPS;
use crate::error::{Error, Result};
use crate::fit::fit_line;
use crate::grid::{render_spectrum, PeriodicGrid};
use crate::kernels::DistributionExpr;
use crate::region::Point;
use crate::regularity::{first_shell, localize, super_polynomial, LOCALIZER_RADIUS};

/// Directions sampled in 2D.
pub const DIRECTIONS_2D: usize = 16;

/// Cone half-angle in 2D.
pub const HALF_ANGLE_2D: f64 = PI / 8.0;

/// Bisection bracket and resolution for critical exponents.
pub const S_BRACKET: (f64, f64) = (-10.0, 10.0);
pub const S_RESOLUTION: f64 = 0.05;

/// Distance from the decision boundary below which pairwise sums are inconclusive.
pub const PAIR_MARGIN: f64 = 0.1;

/// An open cone of frequencies: a half-line in 1D, a tapered sector in 2D.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeSpec {
    Ray { sign: i8 },
    Sector { direction: Point, half_angle: f64 },
}

impl ConeSpec {
    pub fn ray(sign: i8) -> Self {
        ConeSpec::Ray {
            sign: if sign < 0 { -1 } else { 1 },
        }
    }

    pub fn sector(direction: Point, half_angle: f64) -> Result<Self> {
        let n = direction[0].hypot(direction[1]);
        if n == 0.0 || !(half_angle > 0.0 && half_angle < PI / 2.0) {
            return Err(Error::InvalidInput(
                "cones need a nonzero direction and half-angle in (0, π/2)".into(),
            ));
        }
        Ok(ConeSpec::Sector {
            direction: [direction[0] / n, direction[1] / n],
            half_angle,
        })
    }

    /// The default cone around `direction` for the given dimension.
    pub fn around(dim: usize, direction: Point) -> Result<Self> {
        if dim == 1 {
            Ok(ConeSpec::ray(if direction[0] < 0.0 { -1 } else { 1 }))
        } else {
            ConeSpec::sector(direction, HALF_ANGLE_2D)
        }
    }

    pub fn direction(&self) -> Point {
        match *self {
            ConeSpec::Ray { sign } => [sign as f64, 0.0],
            ConeSpec::Sector { direction, .. } => direction,
        }
    }

    pub fn opposite(&self) -> Self {
        match *self {
            ConeSpec::Ray { sign } => ConeSpec::Ray { sign: -sign },
            ConeSpec::Sector {
                direction,
                half_angle,
            } => ConeSpec::Sector {
                direction: [-direction[0], -direction[1]],
                half_angle,
            },
        }
    }

    /// Membership weight in `[0, 1]`; sectors taper with a Gaussian of width half the opening.
    pub fn weight(&self, xi: &Point) -> f64 {
        match *self {
            ConeSpec::Ray { sign } => {
                if xi[0] * sign as f64 > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ConeSpec::Sector {
                direction,
                half_angle,
            } => {
                let r = xi[0].hypot(xi[1]);
                if r == 0.0 {
                    return 0.0;
                }
                let cos = ((xi[0] * direction[0] + xi[1] * direction[1]) / r).clamp(-1.0, 1.0);
                let angle = cos.acos();
                if angle >= half_angle {
                    return 0.0;
                }
                let sigma = 0.5 * half_angle;
                (-angle * angle / (2.0 * sigma * sigma)).exp()
            }
        }
    }
}

/// Default directions: both rays in 1D, 16 equally spaced in 2D.
pub fn default_directions(dim: usize) -> Vec<Point> {
    if dim == 1 {
        vec![[1.0, 0.0], [-1.0, 0.0]]
    } else {
        (0..DIRECTIONS_2D)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / DIRECTIONS_2D as f64;
                [t.cos(), t.sin()]
            })
            .collect()
    }
}

/// Weighted cone energy with its shell decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeEnergy {
    pub energy: f64,
    #[serde(with = "ext_f64")]
    pub tail_slope: f64,
    pub shells: Vec<(u32, f64)>,
}

impl ConeEnergy {
    pub fn is_finite(&self) -> bool {
        self.tail_slope < 0.0
    }

    /// The slope clears the shared threshold `ε`.
    pub fn is_decisive(&self) -> bool {
        self.tail_slope.abs() >= TAIL_EPS
    }
}

/// Spectrum of the localized distribution, reused across weights and cones.
pub struct LocalSpectrum {
    grid: PeriodicGrid,
    spectrum: Vec<Complex64>,
}

impl LocalSpectrum {
    pub fn new(u: &DistributionExpr, x: &Point, radius: f64, grid: PeriodicGrid) -> Result<Self> {
        let v = localize(u, x, radius)?;
        Ok(LocalSpectrum {
            grid,
            spectrum: render_spectrum(&v, &grid)?,
        })
    }

    /// `Σ_{2^j ≤ |ξ| < 2^{j+1}} w_Γ(ξ) ⟨ξ⟩^{2s} |widehat(φu)(ξ)|^2` from the first fitted shell on.
    pub fn shells(&self, cone: &ConeSpec, s: f64) -> Vec<(u32, f64)> {
        let top = (self.grid.nyquist().log2().floor() as u32).saturating_sub(1);
        let mut out = vec![0.0f64; top as usize + 1];
        for (idx, c) in self.spectrum.iter().enumerate() {
            let r = self.grid.xi_norm(idx);
            if r < 1.0 {
                continue;
            }
            let j = r.log2().floor() as usize;
            if j >= out.len() {
                continue;
            }
            let w = cone.weight(&self.grid.xi(idx));
            if w > 0.0 {
                out[j] += w * (1.0 + r * r).powf(s) * c.norm_sqr();
            }
        }
        out.into_iter()
            .enumerate()
            .map(|(j, e)| (j as u32, e))
            .filter(|(j, _)| *j >= first_shell(self.grid.dim))
            .collect()
    }

    pub fn cone_energy(&self, cone: &ConeSpec, s: f64) -> ConeEnergy {
        let shells = self.shells(cone, s);
        let energy = shells.iter().map(|t| t.1).sum();
        let tail_slope = shell_slope(&shells);
        ConeEnergy {
            energy,
            tail_slope,
            shells,
        }
    }

    /// Smooth in the cone: the unweighted shells fall off faster than any power.
    pub fn is_smooth(&self, cone: &ConeSpec) -> bool {
        let e: Vec<f64> = self.shells(cone, 0.0).into_iter().map(|t| t.1).collect();
        super_polynomial(&e)
    }

    /// Bisection on the sign of the tail slope. `+∞` for smooth cones or when
    /// the energy stays finite across the bracket.
    pub fn critical_exponent(&self, cone: &ConeSpec) -> f64 {
        if self.is_smooth(cone) {
            return f64::INFINITY;
        }
        let (mut lo, mut hi) = S_BRACKET;
        if self.cone_energy(cone, hi).is_finite() {
            return f64::INFINITY;
        }
        if !self.cone_energy(cone, lo).is_finite() {
            return f64::NEG_INFINITY;
        }
        while hi - lo > S_RESOLUTION {
            let mid = 0.5 * (lo + hi);
            if self.cone_energy(cone, mid).is_finite() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

fn shell_slope(shells: &[(u32, f64)]) -> f64 {
    let top = shells.iter().map(|t| t.1).fold(0.0, f64::max);
    if top == 0.0 {
        return f64::NEG_INFINITY;
    }
    let pts: Vec<(f64, f64)> = shells
        .iter()
        .filter(|t| t.1 > 0.0)
        .map(|t| (t.0 as f64, t.1.log2()))
        .collect();
    if pts.len() < 2 {
        return f64::NEG_INFINITY;
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    fit_line(&xs, &ys).map(|f| f.slope).unwrap_or(f64::NAN)
}

pub fn cone_energy(
    u: &DistributionExpr,
    x: &Point,
    cone: &ConeSpec,
    s: f64,
    radius: f64,
) -> Result<ConeEnergy> {
    let spec = LocalSpectrum::new(u, x, radius, PeriodicGrid::standard(u.dim()))?;
    Ok(spec.cone_energy(cone, s))
}

/// Critical Sobolev exponent `s*` at `(x, direction)`, resolution 0.05; `+∞` when smooth.
pub fn critical_sobolev_direction(
    u: &DistributionExpr,
    x: &Point,
    direction: &Point,
) -> Result<f64> {
    let spec = LocalSpectrum::new(u, x, LOCALIZER_RADIUS, PeriodicGrid::standard(u.dim()))?;
    Ok(spec.critical_exponent(&ConeSpec::around(u.dim(), *direction)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavefrontEntry {
    pub x: Point,
    pub direction: Point,
    #[serde(with = "ext_f64")]
    pub critical_s: f64,
    /// Tail slope at the queried `s`.
    #[serde(with = "ext_f64")]
    pub slope: f64,
    /// `(x, direction) ∈ WF^s` at the queried `s`.
    pub in_wavefront: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavefrontReport {
    pub dim: usize,
    pub entries: Vec<WavefrontEntry>,
    pub s_queried: f64,
    pub localizer_radius: f64,
    /// The sampled family the report speaks for.
    pub family: String,
}

impl WavefrontReport {
    /// CSV rows `x,direction,s*,slope`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,direction,critical_s,slope,in_wavefront\n");
        for e in &self.entries {
            let (x, d) = if self.dim == 1 {
                (format!("{}", e.x[0]), format!("{}", e.direction[0]))
            } else {
                (
                    format!("\"{},{}\"", e.x[0], e.x[1]),
                    format!("\"{:.6},{:.6}\"", e.direction[0], e.direction[1]),
                )
            };
            let _ = writeln!(
                out,
                "{x},{d},{},{},{}",
                e.critical_s, e.slope, e.in_wavefront
            );
        }
        out
    }

    /// Whitespace matrix of `s*`: one row per point, one column per direction.
    pub fn to_matrix(&self) -> String {
        let mut rows: Vec<(Point, Vec<f64>)> = Vec::new();
        for e in &self.entries {
            match rows.iter_mut().find(|r| r.0 == e.x) {
                Some(r) => r.1.push(e.critical_s),
                None => rows.push((e.x, vec![e.critical_s])),
            }
        }
        let mut out = String::new();
        for (_, vals) in rows {
            let line: Vec<String> = vals.iter().map(|v| format!("{v}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }
}

/// Wavefront scan over points and directions at one queried `s`.
pub fn wavefront_set(
    u: &DistributionExpr,
    xs: &[Point],
    directions: &[Point],
    s: f64,
    radius: f64,
) -> Result<WavefrontReport> {
    Ok(wavefront_sets(u, xs, directions, &[s], radius)?.remove(0))
}

/// [`wavefront_set`] at several Sobolev indices, sharing one localized spectrum per point.
pub fn wavefront_sets(
    u: &DistributionExpr,
    xs: &[Point],
    directions: &[Point],
    s_values: &[f64],
    radius: f64,
) -> Result<Vec<WavefrontReport>> {
    let dim = u.dim();
    let grid = PeriodicGrid::standard(dim);
    // per point, per s, per direction
    let per_point = xs
        .par_iter()
        .map(|x| -> Result<Vec<Vec<WavefrontEntry>>> {
            let spec = LocalSpectrum::new(u, x, radius, grid)?;
            let cones = directions
                .iter()
                .map(|d| ConeSpec::around(dim, *d))
                .collect::<Result<Vec<_>>>()?;
            let fixed: Vec<(f64, bool)> = cones
                .iter()
                .map(|c| (spec.critical_exponent(c), spec.is_smooth(c)))
                .collect();
            Ok(s_values
                .iter()
                .map(|&s| {
                    cones
                        .iter()
                        .zip(&fixed)
                        .map(|(cone, &(critical_s, smooth))| {
                            let ce = spec.cone_energy(cone, s);
                            WavefrontEntry {
                                x: *x,
                                direction: cone.direction(),
                                critical_s,
                                slope: ce.tail_slope,
                                in_wavefront: !smooth && !ce.is_finite(),
                            }
                        })
                        .collect()
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let family = if dim == 1 {
        format!("bump localizer radius {radius}, rays ±1")
    } else {
        format!("bump localizer radius {radius}, {DIRECTIONS_2D} sectors of half-angle π/8 with Gaussian taper")
    };
    Ok(s_values
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let mut entries: Vec<WavefrontEntry> = per_point
                .iter()
                .flat_map(|p| p[i].iter().cloned())
                .collect();
            entries.sort_by(|a, b| {
                a.x[0]
                    .total_cmp(&b.x[0])
                    .then(a.x[1].total_cmp(&b.x[1]))
                    .then(a.direction[0].total_cmp(&b.direction[0]))
                    .then(a.direction[1].total_cmp(&b.direction[1]))
            });
            WavefrontReport {
                dim,
                entries,
                s_queried: s,
                localizer_radius: radius,
                family: family.clone(),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairVerdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEntry {
    pub x: Point,
    pub direction: Point,
    #[serde(with = "ext_f64")]
    pub s_f: f64,
    #[serde(with = "ext_f64")]
    pub s_g: f64,
    /// `s_f + s_g`.
    #[serde(with = "ext_f64")]
    pub margin: f64,
    pub verdict: PairVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseReport {
    pub entries: Vec<PairEntry>,
    pub verdict: PairVerdict,
}

impl PairwiseReport {
    /// Smallest `s_f + s_g` over the sampled pairs.
    pub fn min_margin(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.margin)
            .fold(f64::INFINITY, f64::min)
    }
}

fn classify(margin: f64) -> PairVerdict {
    if margin.is_nan() {
        PairVerdict::Inconclusive
    } else if margin >= PAIR_MARGIN {
        PairVerdict::Pass
    } else if margin <= -PAIR_MARGIN {
        PairVerdict::Fail
    } else {
        PairVerdict::Inconclusive
    }
}

/// For each `(x, ξ̂)`: `s*_f(x, ξ̂) + s*_g(x, -ξ̂) ≥ 0`, with sums within
/// [`PAIR_MARGIN`] of zero reported as inconclusive. The aggregate fails if any
/// pair fails, and is inconclusive if any pair is.
pub fn pairwise_product_criterion(
    f: &DistributionExpr,
    g: &DistributionExpr,
    xs: &[Point],
    directions: &[Point],
) -> Result<PairwiseReport> {
    if f.dim() != g.dim() {
        return Err(Error::DomainMismatch(
            "factors live in different dimensions".into(),
        ));
    }
    let dim = f.dim();
    let grid = PeriodicGrid::standard(dim);
    let per_point = xs
        .par_iter()
        .map(|x| -> Result<Vec<PairEntry>> {
            let sf = LocalSpectrum::new(f, x, LOCALIZER_RADIUS, grid)?;
            let sg = LocalSpectrum::new(g, x, LOCALIZER_RADIUS, grid)?;
            directions
                .iter()
                .map(|d| {
                    let cone = ConeSpec::around(dim, *d)?;
                    let s_f = sf.critical_exponent(&cone);
                    let s_g = sg.critical_exponent(&cone.opposite());
                    let margin = if s_f.is_infinite() && s_f > 0.0 || s_g.is_infinite() && s_g > 0.0
                    {
                        f64::INFINITY
                    } else {
                        s_f + s_g
                    };
                    Ok(PairEntry {
                        x: *x,
                        direction: cone.direction(),
                        s_f,
                        s_g,
                        margin,
                        verdict: classify(margin),
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    let entries: Vec<PairEntry> = per_point.into_iter().flatten().collect();
    let verdict = if entries.iter().any(|e| e.verdict == PairVerdict::Fail) {
        PairVerdict::Fail
    } else if entries
        .iter()
        .any(|e| e.verdict == PairVerdict::Inconclusive)
    {
        PairVerdict::Inconclusive
    } else {
        PairVerdict::Pass
    };
    Ok(PairwiseReport { entries, verdict })
}
