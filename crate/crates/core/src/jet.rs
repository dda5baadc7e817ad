//! Truncated Taylor arithmetic and multi-index derivative jets.
//!
//! [`Series`] carries normalized Taylor coefficients `c_k = f^(k)(y0) / k!` of a
//! univariate function and supports the handful of operations needed to
//! differentiate closed-form bumps exactly. [`Jet`] stores raw partial
//! derivatives `∂^(a,b) f(y0)` for `a + b <= order` in one or two variables.

use std::ops::{Add, Mul, Neg, Sub};

/// Truncated univariate Taylor series.
#[derive(Debug, Clone, PartialEq)]
pub struct Series(pub Vec<f64>);

impl Series {
    pub fn constant(value: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = value;
        Series(c)
    }

    /// The identity `y` expanded at `y0`.
    pub fn variable(y0: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = y0;
        if order >= 1 {
            c[1] = 1.0;
        }
        Series(c)
    }

    pub fn order(&self) -> usize {
        self.0.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.0[0]
    }

    pub fn scale(&self, s: f64) -> Self {
        Series(self.0.iter().map(|c| c * s).collect())
    }

    pub fn recip(&self) -> Self {
        let a = &self.0;
        let mut b = vec![0.0; a.len()];
        b[0] = 1.0 / a[0];
        for k in 1..a.len() {
            let acc: f64 = (1..=k).map(|i| a[i] * b[k - i]).sum();
            b[k] = -acc / a[0];
        }
        Series(b)
    }

    pub fn exp(&self) -> Self {
        let a = &self.0;
        let mut e = vec![0.0; a.len()];
        e[0] = a[0].exp();
        for k in 1..a.len() {
            let acc: f64 = (1..=k).map(|i| i as f64 * a[i] * e[k - i]).sum();
            e[k] = acc / k as f64;
        }
        Series(e)
    }

    /// Derivative values `f^(k)(y0)` for `k = 0..=order`.
    pub fn derivatives(&self) -> Vec<f64> {
        let mut fact = 1.0;
        self.0
            .iter()
            .enumerate()
            .map(|(k, c)| {
                if k > 0 {
                    fact *= k as f64;
                }
                c * fact
            })
            .collect()
    }
}

impl Add for &Series {
    type Output = Series;
    fn add(self, rhs: &Series) -> Series {
        Series(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Series {
    type Output = Series;
    fn sub(self, rhs: &Series) -> Series {
        Series(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Mul for &Series {
    type Output = Series;
    fn mul(self, rhs: &Series) -> Series {
        let n = self.0.len().min(rhs.0.len());
        let c = (0..n)
            .map(|k| (0..=k).map(|i| self.0[i] * rhs.0[k - i]).sum())
            .collect();
        Series(c)
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        self.scale(-1.0)
    }
}

/// Multi-index `(a, b)`; in one dimension `b` is always zero.
pub type MultiIndex = [usize; 2];

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// All multi-indices of total degree `<= order` in `dim` variables, ordered by degree.
pub fn multi_indices(dim: usize, order: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for t in 0..=order {
        if dim == 1 {
            out.push([t, 0]);
        } else {
            for b in 0..=t {
                out.push([t - b, b]);
            }
        }
    }
    out
}

/// Partial derivatives of a function at a point, up to a total order.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    dim: usize,
    order: usize,
    data: Vec<f64>,
}

impl Jet {
    pub fn zeros(dim: usize, order: usize) -> Self {
        let len = if dim == 1 {
            order + 1
        } else {
            (order + 1) * (order + 2) / 2
        };
        Jet {
            dim,
            order,
            data: vec![0.0; len],
        }
    }

    fn index(&self, k: MultiIndex) -> usize {
        if self.dim == 1 {
            k[0]
        } else {
            let t = k[0] + k[1];
            t * (t + 1) / 2 + k[1]
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `∂^k f`; zero for indices beyond the stored order.
    pub fn get(&self, k: MultiIndex) -> f64 {
        if k[0] + k[1] > self.order || (self.dim == 1 && k[1] > 0) {
            return 0.0;
        }
        self.data[self.index(k)]
    }

    pub fn set(&mut self, k: MultiIndex, v: f64) {
        let i = self.index(k);
        self.data[i] = v;
    }

    pub fn value(&self) -> f64 {
        self.data[0]
    }

    /// One-dimensional jet from raw derivatives `f, f', f'', ...`.
    pub fn from_derivatives_1d(derivs: &[f64]) -> Self {
        Jet {
            dim: 1,
            order: derivs.len() - 1,
            data: derivs.to_vec(),
        }
    }

    /// Jet of the tensor product `f(y1) g(y2)` from the univariate derivatives.
    pub fn tensor(f: &[f64], g: &[f64], order: usize) -> Self {
        let mut j = Jet::zeros(2, order);
        for k in multi_indices(2, order) {
            let a = f.get(k[0]).copied().unwrap_or(0.0);
            let b = g.get(k[1]).copied().unwrap_or(0.0);
            j.set(k, a * b);
        }
        j
    }

    pub fn scale(&self, s: f64) -> Self {
        Jet {
            dim: self.dim,
            order: self.order,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &Jet, s: f64) {
        debug_assert_eq!(self.dim, other.dim);
        for k in multi_indices(self.dim, self.order.min(other.order)) {
            let i = self.index(k);
            self.data[i] += s * other.get(k);
        }
    }

    /// Leibniz rule for the product of two jets.
    pub fn product(&self, other: &Jet) -> Jet {
        let order = self.order.min(other.order);
        let mut out = Jet::zeros(self.dim, order);
        for k in multi_indices(self.dim, order) {
            let mut acc = 0.0;
            for i in 0..=k[0] {
                for j in 0..=k[1] {
                    acc += binomial(k[0], i)
                        * binomial(k[1], j)
                        * self.get([i, j])
                        * other.get([k[0] - i, k[1] - j]);
                }
            }
            out.set(k, acc);
        }
        out
    }

    /// Truncate to a lower order.
    pub fn truncate(&self, order: usize) -> Jet {
        let order = order.min(self.order);
        let mut out = Jet::zeros(self.dim, order);
        for k in multi_indices(self.dim, order) {
            out.set(k, self.get(k));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_series_matches_known_derivatives() {
        // exp(2y) at y0 = 0.3: f^(k) = 2^k exp(0.6)
        let y = Series::variable(0.3, 5).scale(2.0);
        let d = y.exp().derivatives();
        for (k, v) in d.iter().enumerate() {
            let expect = 2f64.powi(k as i32) * 0.6f64.exp();
            assert!((v - expect).abs() < 1e-12 * expect, "k={k}");
        }
    }

    #[test]
    fn recip_series_matches_known_derivatives() {
        // 1/(1+y) at 0: f^(k) = (-1)^k k!
        let s = &Series::constant(1.0, 6) + &Series::variable(0.0, 6);
        let d = s.recip().derivatives();
        for (k, v) in d.iter().enumerate() {
            let expect = (-1f64).powi(k as i32) * factorial(k);
            assert!((v - expect).abs() < 1e-9, "k={k}");
        }
    }

    #[test]
    fn leibniz_product_in_two_variables() {
        // f = y1 * y2, g = y1 at (2, 3): (fg) = y1^2 y2; ∂_1∂_2 (fg) = 2 y1 = 4
        let mut f = Jet::zeros(2, 3);
        f.set([0, 0], 6.0);
        f.set([1, 0], 3.0);
        f.set([0, 1], 2.0);
        f.set([1, 1], 1.0);
        let mut g = Jet::zeros(2, 3);
        g.set([0, 0], 2.0);
        g.set([1, 0], 1.0);
        let p = f.product(&g);
        assert_eq!(p.get([0, 0]), 12.0);
        assert_eq!(p.get([1, 1]), 4.0);
        assert_eq!(p.get([2, 1]), 2.0);
        assert_eq!(p.get([0, 2]), 0.0);
    }

    #[test]
    fn multi_index_enumeration() {
        assert_eq!(multi_indices(1, 2), vec![[0, 0], [1, 0], [2, 0]]);
        assert_eq!(multi_indices(2, 1), vec![[0, 0], [1, 0], [0, 1]]);
        assert_eq!(binomial(5, 2), 10.0);
    }
}
