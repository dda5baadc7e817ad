//! Compactly supported test functions: normalized bumps, moment-free bumps,
//! and their scaled/translated, weighted and combined forms.
//!
//! Bumps are built from the profile `exp(-s / (1 - t^2))`. In two dimensions
//! every constructed bump is a tensor product of one-dimensional factors of
//! radius `R / sqrt(2)`, so the support stays inside the ball of radius `R`.
//! Moment-free functions are `(m+1)`-th derivatives of a bump (first factor in
//! 2D), which annihilates every moment of total degree `<= m` analytically.

use std::sync::Arc;

use rayon::prelude::*;

use crate::closed_form::{bump_derivatives_1d, ClosedForm};
use crate::error::Result;
use crate::jet::{multi_indices, Jet};
use crate::region::Point;

/// Grid points per axis for sup-norm evaluation.
pub const CR_GRID: usize = 4096;

/// One-dimensional factor `b^(derivative)` of the bump profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profile {
    pub center: f64,
    pub radius: f64,
    pub sharpness: f64,
    pub derivative: usize,
}

impl Profile {
    pub fn derivatives(&self, y: f64, order: usize) -> Vec<f64> {
        let d = bump_derivatives_1d(
            y,
            self.center,
            self.radius,
            self.sharpness,
            order + self.derivative,
        );
        d[self.derivative..].to_vec()
    }

    pub fn value(&self, y: f64) -> f64 {
        if self.derivative == 0 {
            let u = (y - self.center) / self.radius;
            if u.abs() >= 1.0 {
                return 0.0;
            }
            (-self.sharpness / (1.0 - u * u)).exp()
        } else {
            self.derivatives(y, 0)[0]
        }
    }

    /// Per-order sup norms `sup |∂^k f|`, `k = 0..=order`, on a fine grid.
    pub fn sup_norms(&self, order: usize) -> Vec<f64> {
        let mut out = vec![0.0f64; order + 1];
        for i in 0..=CR_GRID {
            let y = self.center - self.radius + 2.0 * self.radius * i as f64 / CR_GRID as f64;
            for (o, d) in out.iter_mut().zip(self.derivatives(y, order)) {
                *o = o.max(d.abs());
            }
        }
        out
    }
}

#[derive(Debug)]
enum Kind {
    Tensor {
        factors: [Profile; 2],
        amplitude: f64,
    },
    Combination(Vec<(f64, TestFunction)>),
    Weighted {
        weight: ClosedForm,
        base: TestFunction,
    },
    Scaled {
        base: TestFunction,
        lambda: f64,
        x: Point,
    },
}

/// A smooth compactly supported function on `R^d`, `d ∈ {1, 2}`.
#[derive(Debug, Clone)]
pub struct TestFunction {
    dim: usize,
    kind: Arc<Kind>,
    lower: Point,
    upper: Point,
    annihilated_moment_order: i32,
    cr_norms: Vec<f64>,
}

impl TestFunction {
    fn tensor(dim: usize, factors: [Profile; 2], amplitude: f64, annihilated: i32) -> Self {
        let mut lower = [0.0; 2];
        let mut upper = [0.0; 2];
        for i in 0..dim {
            lower[i] = factors[i].center - factors[i].radius;
            upper[i] = factors[i].center + factors[i].radius;
        }
        TestFunction {
            dim,
            kind: Arc::new(Kind::Tensor { factors, amplitude }),
            lower,
            upper,
            annihilated_moment_order: annihilated,
            cr_norms: Vec::new(),
        }
    }

    /// Unnormalized bump `amplitude · Π exp(-s/(1-((y_i-c_i)/R)^2))` with per-axis radius `radius`.
    pub fn bump_at(dim: usize, center: Point, radius: f64, sharpness: f64, amplitude: f64) -> Self {
        let p = |i: usize| Profile {
            center: center[i],
            radius,
            sharpness,
            derivative: 0,
        };
        TestFunction::tensor(dim, [p(0), p(1)], amplitude, -1)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support_box(&self) -> (Point, Point) {
        (self.lower, self.upper)
    }

    /// Largest distance from `p` to any point of the support box.
    pub fn support_reach(&self, p: &Point) -> f64 {
        (0..self.dim)
            .map(|i| {
                let d = (p[i] - self.lower[i])
                    .abs()
                    .max((self.upper[i] - p[i]).abs());
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Whether `p` lies outside the closed support box.
    pub fn vanishes_near(&self, p: &Point) -> bool {
        (0..self.dim).any(|i| p[i] < self.lower[i] || p[i] > self.upper[i])
    }

    /// Moment order annihilated by construction (`-1` when none).
    pub fn annihilated_moment_order(&self) -> i32 {
        self.annihilated_moment_order
    }

    /// Cached sup norms per derivative order, filled by the normalized constructors.
    pub fn cached_cr_norms(&self) -> &[f64] {
        &self.cr_norms
    }

    pub fn is_tensor(&self) -> bool {
        matches!(*self.kind, Kind::Tensor { .. })
    }

    pub fn value(&self, y: &Point) -> f64 {
        match &*self.kind {
            Kind::Tensor { factors, amplitude } => {
                let mut v = *amplitude;
                for (i, f) in factors.iter().enumerate().take(self.dim) {
                    if y[i] <= self.lower[i] || y[i] >= self.upper[i] {
                        return 0.0;
                    }
                    v *= f.value(y[i]);
                }
                v
            }
            Kind::Combination(terms) => terms.iter().map(|(w, f)| w * f.value(y)).sum(),
            Kind::Weighted { weight, base } => {
                let b = base.value(y);
                if b == 0.0 {
                    0.0
                } else {
                    b * weight.value(y, self.dim)
                }
            }
            Kind::Scaled { base, lambda, x } => {
                let mut z = [0.0; 2];
                for i in 0..self.dim {
                    z[i] = (y[i] - x[i]) / lambda;
                }
                base.value(&z) * lambda.powi(-(self.dim as i32))
            }
        }
    }

    /// Partial derivatives up to `order` at `y`.
    pub fn jet(&self, y: &Point, order: usize) -> Result<Jet> {
        match &*self.kind {
            Kind::Tensor { factors, amplitude } => {
                let d0 = factors[0].derivatives(y[0], order);
                if self.dim == 1 {
                    Ok(Jet::from_derivatives_1d(&d0).scale(*amplitude))
                } else {
                    let d1 = factors[1].derivatives(y[1], order);
                    Ok(Jet::tensor(&d0, &d1, order).scale(*amplitude))
                }
            }
            Kind::Combination(terms) => {
                let mut j = Jet::zeros(self.dim, order);
                for (w, f) in terms {
                    j.add_scaled(&f.jet(y, order)?, *w);
                }
                Ok(j)
            }
            Kind::Weighted { weight, base } => {
                if self.vanishes_near(y) {
                    return Ok(Jet::zeros(self.dim, order));
                }
                let b = base.jet(y, order)?;
                Ok(weight.jet(y, self.dim, order)?.product(&b))
            }
            Kind::Scaled { base, lambda, x } => {
                let mut z = [0.0; 2];
                for i in 0..self.dim {
                    z[i] = (y[i] - x[i]) / lambda;
                }
                let b = base.jet(&z, order)?;
                let mut out = Jet::zeros(self.dim, order);
                for k in multi_indices(self.dim, order) {
                    let p = -(self.dim as i32) - (k[0] + k[1]) as i32;
                    out.set(k, b.get(k) * lambda.powi(p));
                }
                Ok(out)
            }
        }
    }

    /// `∂^k φ(y)`.
    pub fn partial(&self, y: &Point, k: [usize; 2]) -> Result<f64> {
        Ok(self.jet(y, k[0] + k[1])?.get(k))
    }

    /// `φ^λ_x(y) = λ^{-d} φ((y - x)/λ)`.
    pub fn scale_translate(&self, lambda: f64, x: &Point) -> TestFunction {
        let mut lower = [0.0; 2];
        let mut upper = [0.0; 2];
        for i in 0..self.dim {
            lower[i] = x[i] + lambda * self.lower[i];
            upper[i] = x[i] + lambda * self.upper[i];
        }
        TestFunction {
            dim: self.dim,
            kind: Arc::new(Kind::Scaled {
                base: self.clone(),
                lambda,
                x: *x,
            }),
            lower,
            upper,
            annihilated_moment_order: self.annihilated_moment_order,
            cr_norms: Vec::new(),
        }
    }

    /// Pointwise product `f · φ`.
    pub fn weighted(&self, f: ClosedForm) -> TestFunction {
        TestFunction {
            dim: self.dim,
            kind: Arc::new(Kind::Weighted {
                weight: f,
                base: self.clone(),
            }),
            lower: self.lower,
            upper: self.upper,
            annihilated_moment_order: -1,
            cr_norms: Vec::new(),
        }
    }

    /// Linear combination `Σ w_i φ_i`.
    pub fn combination(terms: Vec<(f64, TestFunction)>) -> TestFunction {
        let dim = terms[0].1.dim;
        let mut lower = [f64::INFINITY; 2];
        let mut upper = [f64::NEG_INFINITY; 2];
        for (_, t) in &terms {
            for i in 0..dim {
                lower[i] = lower[i].min(t.lower[i]);
                upper[i] = upper[i].max(t.upper[i]);
            }
        }
        if dim == 1 {
            lower[1] = 0.0;
            upper[1] = 0.0;
        }
        let annihilated = terms
            .iter()
            .map(|(_, t)| t.annihilated_moment_order)
            .min()
            .unwrap_or(-1);
        TestFunction {
            dim,
            kind: Arc::new(Kind::Combination(terms)),
            lower,
            upper,
            annihilated_moment_order: annihilated,
            cr_norms: Vec::new(),
        }
    }

    pub fn scaled_by(&self, w: f64) -> TestFunction {
        TestFunction::combination(vec![(w, self.clone())])
    }

    /// Breakpoints along an axis for quadrature: support edges and interior features.
    pub fn breakpoints(&self, axis: usize) -> Vec<f64> {
        let mut v = vec![self.lower[axis], self.upper[axis]];
        match &*self.kind {
            Kind::Tensor { factors, .. } => v.push(factors[axis].center),
            Kind::Combination(terms) => {
                for (_, t) in terms {
                    v.extend(t.breakpoints(axis));
                }
            }
            Kind::Weighted { weight, base } => {
                v.extend(base.breakpoints(axis));
                v.extend(weight.breakpoints(axis));
            }
            Kind::Scaled { base, lambda, x } => {
                v.extend(
                    base.breakpoints(axis)
                        .into_iter()
                        .map(|b| x[axis] + lambda * b),
                );
            }
        }
        v
    }
}

/// Sup norms `max_{|k| = o} sup |∂^k φ|` for `o = 0..=r`.
///
/// Tensor bumps factorize exactly; other functions are scanned on a grid of
/// [`CR_GRID`] points per axis over the support box.
pub fn cr_norms(phi: &TestFunction, r: usize) -> Vec<f64> {
    if let Kind::Tensor { factors, amplitude } = &*phi.kind {
        let s0 = factors[0].sup_norms(r);
        let s1 = if phi.dim == 2 {
            factors[1].sup_norms(r)
        } else {
            vec![1.0; r + 1]
        };
        let mut out = vec![0.0f64; r + 1];
        for k in multi_indices(phi.dim, r) {
            let o = k[0] + k[1];
            out[o] = out[o].max(amplitude.abs() * s0[k[0]] * s1[k[1]]);
        }
        return out;
    }
    let (lo, hi) = phi.support_box();
    let axis = |i: usize| -> Vec<f64> {
        (0..=CR_GRID)
            .map(|k| lo[i] + (hi[i] - lo[i]) * k as f64 / CR_GRID as f64)
            .collect()
    };
    let xs = axis(0);
    let ys = if phi.dim == 2 { axis(1) } else { vec![0.0] };
    xs.par_iter()
        .map(|&x| {
            let mut local = vec![0.0f64; r + 1];
            for &y in &ys {
                if let Ok(j) = phi.jet(&[x, y], r) {
                    for k in multi_indices(phi.dim, r) {
                        let o = k[0] + k[1];
                        local[o] = local[o].max(j.get(k).abs());
                    }
                }
            }
            local
        })
        .reduce(
            || vec![0.0; r + 1],
            |a, b| a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect(),
        )
}

/// `‖φ‖_{C^r} = max_{|k| <= r} sup |∂^k φ|`.
pub fn cr_norm(phi: &TestFunction, r: usize) -> f64 {
    cr_norms(phi, r).into_iter().fold(0.0, f64::max)
}

fn normalized(mut phi: TestFunction, r: usize) -> TestFunction {
    let norms = cr_norms(&phi, r);
    let total = norms.iter().copied().fold(0.0, f64::max);
    if let Kind::Tensor { factors, amplitude } = &*phi.kind {
        phi.kind = Arc::new(Kind::Tensor {
            factors: *factors,
            amplitude: amplitude / total,
        });
    }
    phi.cr_norms = norms.iter().map(|n| n / total).collect();
    phi
}

fn factor_radius(dim: usize, radius: f64) -> f64 {
    if dim == 2 {
        radius / std::f64::consts::SQRT_2
    } else {
        radius
    }
}

/// Bump of the given shape centered at the origin, scaled so that `‖φ‖_{C^r} = 1`.
pub fn make_bump_shaped(dim: usize, radius: f64, sharpness: f64, r: usize) -> TestFunction {
    let rf = factor_radius(dim, radius);
    let p = Profile {
        center: 0.0,
        radius: rf,
        sharpness,
        derivative: 0,
    };
    normalized(TestFunction::tensor(dim, [p, p], 1.0, -1), r)
}

/// Even positive bump supported in the ball of radius `radius`, with `‖φ‖_{C^r} = 1`.
pub fn make_bump(dim: usize, radius: f64, r: usize) -> TestFunction {
    make_bump_shaped(dim, radius, 1.0, r)
}

/// Moment-free function annihilating all moments of degree `<= m`.
pub fn make_moment_free_shaped(
    dim: usize,
    m: usize,
    radius: f64,
    sharpness: f64,
    r: usize,
) -> TestFunction {
    let rf = factor_radius(dim, radius);
    let p = Profile {
        center: 0.0,
        radius: rf,
        sharpness,
        derivative: 0,
    };
    let first = Profile {
        derivative: m + 1,
        ..p
    };
    normalized(TestFunction::tensor(dim, [first, p], 1.0, m as i32), r)
}

pub fn make_moment_free(dim: usize, m: usize, r: usize) -> TestFunction {
    make_moment_free_shaped(dim, m, 1.0, 1.0, r)
}

/// Shapes `(radius, sharpness)` of the fixed estimator dictionary.
pub const DICTIONARY_SHAPES: [(f64, f64); 5] =
    [(1.0, 1.0), (0.8, 1.0), (0.6, 1.0), (1.0, 2.0), (0.8, 0.5)];

/// Default smoothness order for dictionary normalization.
pub const DICTIONARY_R: usize = 3;

/// The five fixed even bumps.
pub fn plain_dictionary(dim: usize) -> Vec<TestFunction> {
    DICTIONARY_SHAPES
        .iter()
        .map(|&(rad, s)| make_bump_shaped(dim, rad, s, DICTIONARY_R))
        .collect()
}

/// Moment-free versions of the five fixed bumps, annihilating degrees `<= m`.
pub fn moment_free_dictionary(dim: usize, m: usize) -> Vec<TestFunction> {
    DICTIONARY_SHAPES
        .iter()
        .map(|&(rad, s)| make_moment_free_shaped(dim, m, rad, s, DICTIONARY_R.max(m + 1)))
        .collect()
}

/// Plain bumps together with their first moment-free versions.
pub fn full_dictionary(dim: usize) -> Vec<TestFunction> {
    let mut d = plain_dictionary(dim);
    d.extend(moment_free_dictionary(dim, 0));
    d
}
