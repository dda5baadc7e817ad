//! Littlewood–Paley partitions on periodic grids and Besov norms, both from
//! dyadic blocks and from scaled test-function pairings.
//!
//! The partition uses `N = 1`: `ψ_0(ξ) = χ(|ξ|)` and
//! `ψ_j(ξ) = χ(2^{-j}|ξ|) - χ(2^{1-j}|ξ|)` for `j ≥ 1`, where `χ` is a smooth
//! step equal to one on `[0, 1]` and zero on `[2, ∞)`. The partial sums
//! telescope to `χ(2^{-j_max}|ξ|)`, so the partition is exact on the resolved
//! band `|ξ| ≤ 2^{j_max}`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::fit_line;
use crate::grid::{render_spectrum, PeriodicGrid};
use crate::kernels::DistributionExpr;
use crate::region::Region;
use crate::scan::{lp_over_x, ScaleRange};
use crate::testfn::{moment_free_dictionary, plain_dictionary};

/// Slope threshold separating bounded from growing tails.
pub const TAIL_EPS: f64 = 0.05;

/// Octaves used for tail slopes.
pub const TAIL_OCTAVES: usize = 4;

/// Relative level under which block norms count as numerically zero.
pub const NOISE_FLOOR: f64 = 1e-12;

fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Smooth cutoff: one for `r ≤ 1`, zero for `r ≥ 2`.
pub fn chi(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        let a = smooth_step(2.0 - r);
        a / (a + smooth_step(r - 1.0))
    }
}

/// Annular profile `ψ(ξ) = χ(|ξ|) - χ(2|ξ|)`, supported in `1/2 ≤ |ξ| ≤ 2`.
pub fn annulus(r: f64) -> f64 {
    chi(r) - chi(2.0 * r)
}

#[derive(Debug, Clone)]
pub struct DyadicPartition {
    pub grid: PeriodicGrid,
    pub j_max: usize,
    /// Overlap parameter `N`; always one.
    pub overlap: u32,
    multipliers: Vec<Vec<f64>>,
}

/// `ψ_j(|ξ|)`.
pub fn psi(j: usize, r: f64) -> f64 {
    if j == 0 {
        chi(r)
    } else {
        annulus(r / 2f64.powi(j as i32))
    }
}

/// Default `j_max` for the standard grids: 9 in 1D, 7 in 2D.
pub fn default_j_max(dim: usize) -> usize {
    if dim == 1 {
        9
    } else {
        7
    }
}

pub fn build_partition(grid: PeriodicGrid, j_max: usize) -> Result<DyadicPartition> {
    if j_max < 2 {
        return Err(Error::InvalidInput(format!(
            "j_max = {j_max} must be at least 2"
        )));
    }
    let needed = j_max + 1;
    if 2f64.powi(needed as i32) > grid.nyquist() {
        return Err(Error::BandTooNarrow {
            j_max,
            needed,
            nyquist: grid.nyquist(),
        });
    }
    let multipliers = (0..=j_max)
        .into_par_iter()
        .map(|j| {
            (0..grid.len())
                .map(|idx| psi(j, grid.xi_norm(idx)))
                .collect()
        })
        .collect();
    Ok(DyadicPartition {
        grid,
        j_max,
        overlap: 1,
        multipliers,
    })
}

impl DyadicPartition {
    pub fn standard(dim: usize) -> Result<Self> {
        build_partition(PeriodicGrid::standard(dim), default_j_max(dim))
    }

    pub fn multiplier(&self, j: usize) -> &[f64] {
        &self.multipliers[j]
    }

    /// `Σ_j ψ_j` at flat frequency index `idx`.
    pub fn sum_at(&self, idx: usize) -> f64 {
        self.multipliers.iter().map(|m| m[idx]).sum()
    }

    /// Frequencies `|ξ| ≤ 2^{j_max}` on which the partition sums to one.
    pub fn resolved_band(&self) -> f64 {
        2f64.powi(self.j_max as i32)
    }
}

/// All blocks `ψ_j(D)u`, `j = 0..=j_max`.
#[derive(Debug, Clone)]
pub struct BlockSeries {
    pub blocks: Vec<Vec<f64>>,
    grid: PeriodicGrid,
}

impl BlockSeries {
    pub fn norms(&self, p: f64) -> Vec<f64> {
        self.blocks
            .iter()
            .map(|b| self.grid.lp_norm(b, p))
            .collect()
    }
}

pub fn block_series(u: &DistributionExpr, part: &DyadicPartition) -> Result<BlockSeries> {
    let spec = render_spectrum(u, &part.grid)?;
    let blocks = (0..=part.j_max)
        .into_par_iter()
        .map(|j| {
            let filtered: Vec<_> = spec
                .iter()
                .zip(part.multiplier(j))
                .map(|(s, m)| s * m)
                .collect();
            part.grid.inverse_real(&filtered)
        })
        .collect();
    Ok(BlockSeries {
        blocks,
        grid: part.grid,
    })
}

/// `ψ_j(D)u` on the grid.
pub fn lp_block(u: &DistributionExpr, part: &DyadicPartition, j: usize) -> Result<Vec<f64>> {
    if j > part.j_max {
        return Err(Error::InvalidInput(format!(
            "block {j} beyond j_max = {}",
            part.j_max
        )));
    }
    let spec = render_spectrum(u, &part.grid)?;
    let filtered: Vec<_> = spec
        .iter()
        .zip(part.multiplier(j))
        .map(|(s, m)| s * m)
        .collect();
    Ok(part.grid.inverse_real(&filtered))
}

/// A truncated Besov-type norm with its tail diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BesovNorm {
    pub value: f64,
    /// Slope of `log2(summand)` over the last octaves; `-∞` when the tail vanishes.
    pub tail_slope: f64,
    /// `(index, summand)` with index `j` (dyadic) or `n` (test-function scales).
    pub terms: Vec<(u32, f64)>,
}

impl BesovNorm {
    pub fn is_finite(&self) -> bool {
        self.tail_slope <= TAIL_EPS
    }

    /// CSV table `index,summand`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,summand\n");
        for (j, v) in &self.terms {
            let _ = writeln!(s, "{j},{v:e}");
        }
        s
    }
}

/// Fitted slope of `log2 v` against the index over the last `TAIL_OCTAVES` entries.
fn tail_slope(terms: &[(u32, f64)]) -> f64 {
    let top = terms.iter().map(|t| t.1).fold(0.0, f64::max);
    let tail = &terms[terms.len().saturating_sub(TAIL_OCTAVES)..];
    if top == 0.0 || tail.iter().all(|t| t.1 <= NOISE_FLOOR * top) {
        return f64::NEG_INFINITY;
    }
    let floor = NOISE_FLOOR * top;
    let xs: Vec<f64> = tail.iter().map(|t| t.0 as f64).collect();
    let ys: Vec<f64> = tail.iter().map(|t| t.1.max(floor).log2()).collect();
    fit_line(&xs, &ys).map(|f| f.slope).unwrap_or(f64::NAN)
}

fn lq(values: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        values.iter().copied().fold(0.0, f64::max)
    } else {
        values.iter().map(|v| v.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// `‖(2^{js} ‖ψ_j(D)u‖_{L^p})_j‖_{ℓ^q}` truncated at `j_max`.
pub fn besov_norm(
    u: &DistributionExpr,
    s: f64,
    p: f64,
    q: f64,
    part: &DyadicPartition,
) -> Result<BesovNorm> {
    if !(p >= 1.0 && q >= 1.0) {
        return Err(Error::InvalidInput(
            "Besov indices p, q must lie in [1, ∞]".into(),
        ));
    }
    let norms = block_series(u, part)?.norms(p);
    Ok(besov_from_norms(&norms, s, q))
}

fn besov_from_norms(norms: &[f64], s: f64, q: f64) -> BesovNorm {
    let top = norms.iter().copied().fold(0.0, f64::max);
    let terms: Vec<(u32, f64)> = norms
        .iter()
        .enumerate()
        .map(|(j, n)| {
            let n = if *n <= NOISE_FLOOR * top { 0.0 } else { *n };
            (j as u32, 2f64.powf(j as f64 * s) * n)
        })
        .collect();
    let values: Vec<f64> = terms.iter().map(|t| t.1).collect();
    BesovNorm {
        value: lq(&values, q),
        tail_slope: tail_slope(&terms),
        terms,
    }
}

/// `sup_n 2^{nα} ‖ sup_φ |u(φ^{2^{-n}}_x)| ‖_{L^p(x ∈ K)}` over `n = 2..=n_max`,
/// with plain bumps for `α < 0` and bumps annihilating moments up to `⌊α⌋` otherwise.
pub fn local_besov_norm(
    u: &DistributionExpr,
    alpha: f64,
    p: f64,
    region: &Region,
    n_max: u32,
) -> Result<BesovNorm> {
    let dim = u.dim();
    let dict = if alpha < 0.0 {
        plain_dictionary(dim)
    } else {
        moment_free_dictionary(dim, alpha.floor() as usize)
    };
    let range = ScaleRange { n_min: 2, n_max };
    let mut terms = Vec::new();
    for n in range.exponents() {
        let lam = 2f64.powi(-(n as i32));
        let m = lp_over_x(u, &dict, region, lam, p)?;
        terms.push((n, 2f64.powf(n as f64 * alpha) * m));
    }
    let values: Vec<f64> = terms.iter().map(|t| t.1).collect();
    Ok(BesovNorm {
        value: lq(&values, f64::INFINITY),
        tail_slope: tail_slope(&terms),
        terms,
    })
}

/// Critical `s` of the dyadic `B^s_{p,∞}` norm: minus the tail slope of the block norms.
/// `+∞` when the blocks vanish beyond the low frequencies.
pub fn dyadic_critical_exponent(
    u: &DistributionExpr,
    p: f64,
    part: &DyadicPartition,
) -> Result<f64> {
    let norms = block_series(u, part)?.norms(p);
    Ok(-besov_from_norms(&norms, 0.0, f64::INFINITY).tail_slope)
}

/// Critical `α` of the test-function norm: the tail slope of the scaled
/// pairings in `log2 λ`, raising the annihilated moment order while the slope
/// saturates it. `+∞` when all pairings vanish.
pub fn local_critical_exponent(
    u: &DistributionExpr,
    p: f64,
    region: &Region,
    n_max: u32,
) -> Result<f64> {
    let dim = u.dim();
    let range = ScaleRange { n_min: 2, n_max };
    let magnitudes = |dict: &[crate::testfn::TestFunction]| -> Result<Vec<(u32, f64)>> {
        range
            .exponents()
            .into_iter()
            .map(|n| Ok((n, lp_over_x(u, dict, region, 2f64.powi(-(n as i32)), p)?)))
            .collect()
    };
    let plain = magnitudes(&plain_dictionary(dim))?;
    let mut gamma = -tail_slope(&plain);
    if gamma < -TAIL_EPS {
        return Ok(gamma);
    }
    for m in 0..3usize {
        // annihilated pairings are compared against the plain magnitudes, so
        // that quadrature round-off is not mistaken for a decay rate
        let mut terms = magnitudes(&moment_free_dictionary(dim, m))?;
        for (t, r) in terms.iter_mut().zip(&plain) {
            if t.1 <= 1e-10 * r.1 {
                t.1 = 0.0;
            }
        }
        gamma = -tail_slope(&terms);
        if gamma < (m + 1) as f64 - TAIL_EPS {
            return Ok(gamma);
        }
    }
    Ok(gamma)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi_is_a_smooth_step() {
        assert_eq!(chi(0.3), 1.0);
        assert_eq!(chi(2.5), 0.0);
        assert!((chi(1.5) - 0.5).abs() < 1e-15);
        assert!(chi(1.2) > chi(1.7));
    }

    #[test]
    fn partition_sums_to_one_on_band() {
        let g = PeriodicGrid::new(1, 1024).unwrap();
        let p = build_partition(g, 7).unwrap();
        for idx in 0..g.len() {
            if g.xi_norm(idx) <= p.resolved_band() {
                assert!((p.sum_at(idx) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn band_too_narrow() {
        let g = PeriodicGrid::new(1, 64).unwrap();
        assert!(matches!(
            build_partition(g, 7),
            Err(Error::BandTooNarrow { .. })
        ));
    }

    #[test]
    fn self_similarity() {
        for r in [0.6, 1.0, 1.3, 1.9] {
            assert!((psi(3, 8.0 * r) - annulus(r)).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_lives_in_block_zero() {
        let p = build_partition(PeriodicGrid::new(1, 256).unwrap(), 5).unwrap();
        let b = block_series(&DistributionExpr::constant(1, 1.0), &p).unwrap();
        assert!(b.blocks[0].iter().all(|v| (v - 1.0).abs() < 1e-12));
        for j in 1..=5 {
            assert!(p.grid.lp_norm(&b.blocks[j], f64::INFINITY) < 1e-10);
        }
        let n = besov_norm(
            &DistributionExpr::constant(1, 1.0),
            0.7,
            f64::INFINITY,
            f64::INFINITY,
            &p,
        )
        .unwrap();
        assert!((n.value - 1.0).abs() < 1e-12);
        assert!(n.is_finite());
    }
}
