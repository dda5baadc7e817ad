//! Scale scans `λ = 2^{-n}` of scaled pairings `u(φ^λ_x)` over a region.
//!
//! For each scale the supremum over the dictionary is taken pointwise in `x`,
//! then an `L^p` norm in `x` is formed. Finite `p` uses composite
//! Gauss–Legendre panels: uniform panels across the region plus panels graded
//! geometrically toward every singular point at the current scale, since the
//! map `x ↦ u(φ^λ_x)` varies on scale `λ` there. `p = ∞` takes the max over a
//! sample grid (33 per axis in 1D, 17 in 2D), the singular points, offsets
//! `λ·{1/4, 1/2, 3/4}` from them, and (in 1D) all quadrature nodes. In 2D the
//! graded panels come from a quadtree refined toward the singular points.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::kernels::DistributionExpr;
use crate::quad::gauss_legendre;
use crate::region::{Point, Region};
use crate::testfn::TestFunction;

/// Dyadic scale range `λ = 2^{-n}`, `n_min ≤ n ≤ n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleRange {
    pub n_min: u32,
    pub n_max: u32,
}

impl Default for ScaleRange {
    fn default() -> Self {
        ScaleRange {
            n_min: 2,
            n_max: 10,
        }
    }
}

impl ScaleRange {
    pub fn exponents(&self) -> Vec<u32> {
        (self.n_min..=self.n_max).collect()
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.exponents()
            .into_iter()
            .map(|n| 2f64.powi(-(n as i32)))
            .collect()
    }

    pub fn len(&self) -> usize {
        (self.n_max.saturating_sub(self.n_min) + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.n_max < self.n_min
    }
}

/// Samples per axis for sup-norm scans in 1D.
pub const SUP_SAMPLES: usize = 33;

/// Samples per axis for sup-norm scans in 2D.
pub const SUP_SAMPLES_2D: usize = 17;

pub fn sup_samples(dim: usize) -> usize {
    if dim == 1 {
        SUP_SAMPLES
    } else {
        SUP_SAMPLES_2D
    }
}

fn axis_cuts(lo: f64, hi: f64, sing: &[f64], lambda: f64, uniform: f64) -> Vec<f64> {
    let mut cuts = vec![lo, hi];
    let m = ((hi - lo) / uniform).round().max(1.0) as usize;
    cuts.extend((1..m).map(|k| lo + (hi - lo) * k as f64 / m as f64));
    for &c in sing {
        cuts.push(c);
        let mut r = 0.25 * lambda;
        while r < 2.0 * (hi - lo) {
            cuts.push(c - r);
            cuts.push(c + r);
            r *= 2.0;
        }
        for f in [0.5, 0.75, 0.6, 0.8] {
            cuts.push(c - f * lambda);
            cuts.push(c + f * lambda);
        }
    }
    cuts.retain(|&x| x >= lo && x <= hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    cuts
}

fn axis_nodes(cuts: &[f64], ppp: usize) -> Vec<(f64, f64)> {
    let (gx, gw) = gauss_legendre(ppp);
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        for (x, wt) in gx.iter().zip(&gw) {
            out.push((c + h * x, h * wt));
        }
    }
    out
}

/// Quadrature nodes and weights for `∫_K · dx` at scale `λ`.
pub fn x_nodes(region: &Region, singular: &[Point], lambda: f64) -> Vec<(Point, f64)> {
    let (lo, hi) = region.bounding_box();
    let mut out = if region.dim() == 1 {
        let s: Vec<f64> = singular.iter().map(|p| p[0]).collect();
        axis_nodes(&axis_cuts(lo[0], hi[0], &s, lambda, 1.0 / 16.0), 6)
            .into_iter()
            .map(|(x, w)| ([x, 0.0], w))
            .collect()
    } else {
        quadtree_nodes(lo, hi, singular, lambda)
    };
    out.retain(|(p, _)| region.contains(p));
    out
}

/// Tensor Gauss nodes on square cells, splitting cells near singular points
/// until they are smaller than `λ/4`.
fn quadtree_nodes(lo: Point, hi: Point, singular: &[Point], lambda: f64) -> Vec<(Point, f64)> {
    const PPP: usize = 3;
    let (gx, gw) = gauss_legendre(PPP);
    let m = 4usize;
    let mut stack = Vec::new();
    for i in 0..m {
        for j in 0..m {
            let a = [
                lo[0] + (hi[0] - lo[0]) * i as f64 / m as f64,
                lo[1] + (hi[1] - lo[1]) * j as f64 / m as f64,
            ];
            let b = [
                lo[0] + (hi[0] - lo[0]) * (i + 1) as f64 / m as f64,
                lo[1] + (hi[1] - lo[1]) * (j + 1) as f64 / m as f64,
            ];
            stack.push((a, b));
        }
    }
    let mut out = Vec::new();
    while let Some((a, b)) = stack.pop() {
        let size = (b[0] - a[0]).max(b[1] - a[1]);
        let near = singular.iter().any(|c| {
            let dx = (c[0] - a[0].max(c[0].min(b[0]))).abs();
            let dy = (c[1] - a[1].max(c[1].min(b[1]))).abs();
            dx.max(dy) < size
        });
        if near && size > 0.25 * lambda {
            let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
            stack.push((a, mid));
            stack.push(([mid[0], a[1]], [b[0], mid[1]]));
            stack.push(([a[0], mid[1]], [mid[0], b[1]]));
            stack.push((mid, b));
            continue;
        }
        let c = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
        let h = [0.5 * (b[0] - a[0]), 0.5 * (b[1] - a[1])];
        for (x, wx) in gx.iter().zip(&gw) {
            for (y, wy) in gx.iter().zip(&gw) {
                out.push(([c[0] + h[0] * x, c[1] + h[1] * y], h[0] * h[1] * wx * wy));
            }
        }
    }
    out
}

/// Sample points for `sup_{x ∈ K}` at scale `λ`.
pub fn sup_points(region: &Region, singular: &[Point], lambda: f64) -> Vec<Point> {
    let dim = region.dim();
    let mut pts = region.grid_samples(sup_samples(dim));
    for c in singular {
        pts.push(*c);
        for f in [0.25, 0.5, 0.75] {
            for s in [-1.0, 1.0] {
                for axis in 0..dim {
                    let mut p = *c;
                    p[axis] += s * f * lambda;
                    pts.push(p);
                }
                if dim == 2 {
                    pts.push([c[0] + s * f * lambda, c[1] + s * f * lambda]);
                    pts.push([c[0] + s * f * lambda, c[1] - s * f * lambda]);
                }
            }
        }
    }
    if dim == 1 {
        pts.extend(
            x_nodes(region, singular, lambda)
                .into_iter()
                .map(|(p, _)| p),
        );
    }
    pts.retain(|p| region.contains(p));
    pts
}

/// `sup_{φ ∈ dict} |u(φ^λ_x)|`.
pub fn sup_pairing(
    u: &DistributionExpr,
    dict: &[TestFunction],
    x: &Point,
    lambda: f64,
) -> Result<f64> {
    let mut m = 0.0f64;
    for phi in dict {
        m = m.max(u.pair_scaled(phi, x, lambda)?.abs());
    }
    Ok(m)
}

/// Singular points of `u` lying in (or near) the region.
pub fn relevant_singular_points(u: &DistributionExpr, region: &Region) -> Vec<Point> {
    u.singular_support()
        .points()
        .map(|pts| {
            pts.iter()
                .copied()
                .filter(|p| region.enlargement(0.5).contains(p))
                .collect()
        })
        .unwrap_or_default()
}

/// `‖ sup_φ |u(φ^λ_x)| ‖_{L^p(x ∈ K)}`.
pub fn lp_over_x(
    u: &DistributionExpr,
    dict: &[TestFunction],
    region: &Region,
    lambda: f64,
    p: f64,
) -> Result<f64> {
    Ok(lp_norms_over_x(u, dict, region, lambda, &[p])?[0])
}

/// [`lp_over_x`] for several `p` sharing one set of pairings.
pub fn lp_norms_over_x(
    u: &DistributionExpr,
    dict: &[TestFunction],
    region: &Region,
    lambda: f64,
    ps: &[f64],
) -> Result<Vec<f64>> {
    let sing = relevant_singular_points(u, region);
    let eval = |pts: &[Point]| -> Result<Vec<f64>> {
        pts.par_iter()
            .map(|x| sup_pairing(u, dict, x, lambda))
            .collect()
    };
    let finite = ps.iter().any(|p| p.is_finite());
    let (nodes, node_vals) = if finite {
        let nodes = x_nodes(region, &sing, lambda);
        let pts: Vec<Point> = nodes.iter().map(|n| n.0).collect();
        let vals = eval(&pts)?;
        (nodes, vals)
    } else {
        (Vec::new(), Vec::new())
    };
    let sup = if ps.iter().any(|p| p.is_infinite()) {
        let mut pts = sup_points(region, &sing, lambda);
        if finite {
            // node values are already known
            pts.retain(|p| !nodes.iter().any(|n| n.0 == *p));
        }
        eval(&pts)?
            .into_iter()
            .chain(node_vals.iter().copied())
            .fold(0.0, f64::max)
    } else {
        0.0
    };
    Ok(ps
        .iter()
        .map(|&p| {
            if p.is_infinite() {
                sup
            } else {
                nodes
                    .iter()
                    .zip(&node_vals)
                    .map(|((_, w), v)| w * v.powf(p))
                    .sum::<f64>()
                    .powf(1.0 / p)
            }
        })
        .collect())
}

/// `(log2 λ, log2 M(λ))` pairs with zero magnitudes dropped.
pub fn log_samples(lambdas: &[f64], mags: &[f64]) -> Vec<(f64, f64)> {
    lambdas
        .iter()
        .zip(mags)
        .filter(|(_, m)| **m > 0.0 && m.is_finite())
        .map(|(l, m)| (l.log2(), m.log2()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testfn::make_bump;

    #[test]
    fn nodes_integrate_constant_over_region() {
        let k = Region::cube(1, -1.0, 1.0);
        let s: f64 = x_nodes(&k, &[[0.0, 0.0]], 1.0 / 64.0)
            .iter()
            .map(|(_, w)| w)
            .sum();
        assert!((s - 2.0).abs() < 1e-13);
        let k2 = Region::cube(2, -0.5, 0.5);
        let s: f64 = x_nodes(&k2, &[[0.1, 0.2]], 0.25)
            .iter()
            .map(|(_, w)| w)
            .sum();
        assert!((s - 1.0).abs() < 1e-13);
    }

    #[test]
    fn delta_l2_norm_scales_like_half_power() {
        // ‖λ^{-1} φ(-x/λ)‖_{L^2} = λ^{-1/2} ‖φ‖_{L^2}
        let u = DistributionExpr::delta(1, [0.0, 0.0]);
        let dict = vec![make_bump(1, 1.0, 2)];
        let k = Region::cube(1, -1.0, 1.0);
        let a = lp_over_x(&u, &dict, &k, 1.0 / 16.0, 2.0).unwrap();
        let b = lp_over_x(&u, &dict, &k, 1.0 / 256.0, 2.0).unwrap();
        assert!((b / a - 4.0).abs() < 1e-6, "{}", b / a);
    }
}
