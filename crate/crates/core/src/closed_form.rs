//! Closed-form pointwise functions with exact derivative jets.
//!
//! These serve as the smooth (or finitely regular) factors of products,
//! localizers, and function-type kernels such as `|x|^0.6` cusps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{multi_indices, Jet, Series};
use crate::region::{distance, Point};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosedForm {
    Constant(f64),
    /// `Σ c_k (y - center)^k` in one variable.
    Polynomial {
        center: f64,
        coeffs: Vec<f64>,
    },
    /// `amplitude · Π_i exp(-s / (1 - ((y_i - c_i)/R)^2))`, a tensor bump.
    Bump {
        center: Point,
        radius: f64,
        sharpness: f64,
        amplitude: f64,
    },
    /// `amplitude · |y - c|^exponent`; negative exponents only away from `c`.
    Cusp {
        center: Point,
        exponent: f64,
        amplitude: f64,
    },
    /// `(y_1 - c_1)^p (y_2 - c_2)^q`.
    Monomial {
        center: Point,
        powers: [usize; 2],
    },
    /// `cos(k · y + phase)`.
    Cosine {
        wavevector: Point,
        phase: f64,
    },
    Sum(Vec<(f64, ClosedForm)>),
    Product(Box<ClosedForm>, Box<ClosedForm>),
}

/// Derivatives `b^(k)(y)`, `k = 0..=order`, of `exp(-s/(1-((y-c)/R)^2))`.
pub(crate) fn bump_derivatives_1d(
    y: f64,
    center: f64,
    radius: f64,
    sharpness: f64,
    order: usize,
) -> Vec<f64> {
    let u0 = (y - center) / radius;
    if u0.abs() >= 1.0 {
        return vec![0.0; order + 1];
    }
    let w0 = 1.0 - u0 * u0;
    if -sharpness / w0 < -700.0 {
        return vec![0.0; order + 1];
    }
    let u = Series::variable(y, order);
    let u = Series(
        u.0.iter()
            .enumerate()
            .map(|(k, c)| {
                if k == 0 {
                    (c - center) / radius
                } else {
                    c / radius
                }
            })
            .collect(),
    );
    let w = &Series::constant(1.0, order) - &(&u * &u);
    let e = w.recip().scale(-sharpness).exp();
    e.derivatives()
}

fn cusp_derivative_1d(t: f64, a: f64, k: usize) -> Result<f64> {
    let mut coef = 1.0;
    for i in 0..k {
        coef *= a - i as f64;
    }
    if t == 0.0 {
        // |t|^a is the polynomial t^a for even integers a
        if a >= 0.0 && a.fract() == 0.0 && (a as usize).is_multiple_of(2) {
            return Ok(if k == a as usize { coef } else { 0.0 });
        }
        if a - k as f64 > 0.0 {
            return Ok(0.0);
        }
        return Err(Error::InsufficientDerivatives {
            needed: k,
            available: (a.ceil().max(0.0) as usize).saturating_sub(1),
        });
    }
    let sign = if k % 2 == 1 { t.signum() } else { 1.0 };
    Ok(coef * t.abs().powf(a - k as f64) * sign)
}

impl ClosedForm {
    pub fn constant(c: f64) -> Self {
        ClosedForm::Constant(c)
    }

    /// Bump normalized to one at its center.
    pub fn unit_bump(center: Point, radius: f64, dim: usize) -> Self {
        ClosedForm::Bump {
            center,
            radius,
            sharpness: 1.0,
            amplitude: std::f64::consts::E.powi(dim as i32),
        }
    }

    pub fn cusp(center: Point, exponent: f64) -> Self {
        ClosedForm::Cusp {
            center,
            exponent,
            amplitude: 1.0,
        }
    }

    pub fn times(self, other: ClosedForm) -> Self {
        ClosedForm::Product(Box::new(self), Box::new(other))
    }

    pub fn plus(self, other: ClosedForm) -> Self {
        ClosedForm::Sum(vec![(1.0, self), (1.0, other)])
    }

    /// `y ↦ f(y - t)`.
    pub fn translated(&self, t: &Point) -> ClosedForm {
        let sh = |c: &Point| [c[0] + t[0], c[1] + t[1]];
        match self {
            ClosedForm::Constant(c) => ClosedForm::Constant(*c),
            ClosedForm::Polynomial { center, coeffs } => ClosedForm::Polynomial {
                center: center + t[0],
                coeffs: coeffs.clone(),
            },
            ClosedForm::Bump {
                center,
                radius,
                sharpness,
                amplitude,
            } => ClosedForm::Bump {
                center: sh(center),
                radius: *radius,
                sharpness: *sharpness,
                amplitude: *amplitude,
            },
            ClosedForm::Cusp {
                center,
                exponent,
                amplitude,
            } => ClosedForm::Cusp {
                center: sh(center),
                exponent: *exponent,
                amplitude: *amplitude,
            },
            ClosedForm::Monomial { center, powers } => ClosedForm::Monomial {
                center: sh(center),
                powers: *powers,
            },
            ClosedForm::Cosine { wavevector, phase } => ClosedForm::Cosine {
                wavevector: *wavevector,
                phase: phase - wavevector[0] * t[0] - wavevector[1] * t[1],
            },
            ClosedForm::Sum(terms) => {
                ClosedForm::Sum(terms.iter().map(|(w, f)| (*w, f.translated(t))).collect())
            }
            ClosedForm::Product(a, b) => a.translated(t).times(b.translated(t)),
        }
    }

    pub fn value(&self, y: &Point, dim: usize) -> f64 {
        match self {
            ClosedForm::Constant(c) => *c,
            ClosedForm::Polynomial { center, coeffs } => {
                let t = y[0] - center;
                coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
            }
            ClosedForm::Bump {
                center,
                radius,
                sharpness,
                amplitude,
            } => {
                let mut v = *amplitude;
                for i in 0..dim {
                    let u = (y[i] - center[i]) / radius;
                    if u.abs() >= 1.0 {
                        return 0.0;
                    }
                    v *= (-sharpness / (1.0 - u * u)).exp();
                }
                v
            }
            ClosedForm::Cusp {
                center,
                exponent,
                amplitude,
            } => amplitude * distance(y, center, dim).powf(*exponent),
            ClosedForm::Monomial { center, powers } => (0..dim)
                .map(|i| (y[i] - center[i]).powi(powers[i] as i32))
                .product(),
            ClosedForm::Cosine { wavevector, phase } => {
                let arg: f64 = (0..dim).map(|i| wavevector[i] * y[i]).sum();
                (arg + phase).cos()
            }
            ClosedForm::Sum(terms) => terms.iter().map(|(w, f)| w * f.value(y, dim)).sum(),
            ClosedForm::Product(a, b) => a.value(y, dim) * b.value(y, dim),
        }
    }

    /// Partial derivatives up to `order` at `y`.
    pub fn jet(&self, y: &Point, dim: usize, order: usize) -> Result<Jet> {
        match self {
            ClosedForm::Constant(c) => {
                let mut j = Jet::zeros(dim, order);
                j.set([0, 0], *c);
                Ok(j)
            }
            ClosedForm::Polynomial { center, coeffs } => {
                if dim != 1 {
                    return Err(Error::DomainMismatch(
                        "polynomial factors are one-dimensional".into(),
                    ));
                }
                let t = y[0] - center;
                let mut d = vec![0.0; order + 1];
                for (k, dk) in d.iter_mut().enumerate() {
                    // k-th derivative of Σ c_n t^n
                    let mut acc = 0.0;
                    for (n, c) in coeffs.iter().enumerate().skip(k) {
                        let falling: f64 = (0..k).map(|i| (n - i) as f64).product();
                        acc += c * falling * t.powi((n - k) as i32);
                    }
                    *dk = acc;
                }
                Ok(Jet::from_derivatives_1d(&d))
            }
            ClosedForm::Bump {
                center,
                radius,
                sharpness,
                amplitude,
            } => {
                let d0 = bump_derivatives_1d(y[0], center[0], *radius, *sharpness, order);
                if dim == 1 {
                    Ok(Jet::from_derivatives_1d(&d0).scale(*amplitude))
                } else {
                    let d1 = bump_derivatives_1d(y[1], center[1], *radius, *sharpness, order);
                    Ok(Jet::tensor(&d0, &d1, order).scale(*amplitude))
                }
            }
            ClosedForm::Cusp {
                center,
                exponent,
                amplitude,
            } => {
                if dim == 1 {
                    let d = (0..=order)
                        .map(|k| cusp_derivative_1d(y[0] - center[0], *exponent, k))
                        .collect::<Result<Vec<_>>>()?;
                    Ok(Jet::from_derivatives_1d(&d).scale(*amplitude))
                } else if order == 0 {
                    let mut j = Jet::zeros(2, 0);
                    j.set([0, 0], self.value(y, dim));
                    Ok(j)
                } else {
                    Err(Error::InsufficientDerivatives {
                        needed: order,
                        available: 0,
                    })
                }
            }
            ClosedForm::Monomial { center, powers } => {
                let axis = |i: usize| -> Vec<f64> {
                    let t = y[i] - center[i];
                    let p = powers[i];
                    (0..=order)
                        .map(|k| {
                            if k > p {
                                0.0
                            } else {
                                let falling: f64 = (0..k).map(|j| (p - j) as f64).product();
                                falling * t.powi((p - k) as i32)
                            }
                        })
                        .collect()
                };
                if dim == 1 {
                    Ok(Jet::from_derivatives_1d(&axis(0)))
                } else {
                    Ok(Jet::tensor(&axis(0), &axis(1), order))
                }
            }
            ClosedForm::Cosine { wavevector, phase } => {
                let arg: f64 = (0..dim).map(|i| wavevector[i] * y[i]).sum::<f64>() + phase;
                let mut j = Jet::zeros(dim, order);
                for k in multi_indices(dim, order) {
                    let n = k[0] + k[1];
                    let factor = wavevector[0].powi(k[0] as i32) * wavevector[1].powi(k[1] as i32);
                    // d^n/dθ^n cos θ = cos(θ + nπ/2)
                    let v = (arg + n as f64 * std::f64::consts::FRAC_PI_2).cos();
                    j.set(k, factor * v);
                }
                Ok(j)
            }
            ClosedForm::Sum(terms) => {
                let mut j = Jet::zeros(dim, order);
                for (w, f) in terms {
                    j.add_scaled(&f.jet(y, dim, order)?, *w);
                }
                Ok(j)
            }
            ClosedForm::Product(a, b) => Ok(a.jet(y, dim, order)?.product(&b.jet(y, dim, order)?)),
        }
    }

    /// Largest angular frequency present (zero for non-oscillatory forms).
    pub fn max_frequency(&self) -> f64 {
        match self {
            ClosedForm::Cosine { wavevector, .. } => wavevector[0].hypot(wavevector[1]),
            ClosedForm::Sum(terms) => terms
                .iter()
                .map(|(_, f)| f.max_frequency())
                .fold(0.0, f64::max),
            ClosedForm::Product(a, b) => a.max_frequency() + b.max_frequency(),
            _ => 0.0,
        }
    }

    /// Non-smooth points with the local power `e` of `|y - c|^e` behaviour.
    pub fn local_exponents(&self) -> Vec<(Point, f64)> {
        match self {
            ClosedForm::Cusp {
                center, exponent, ..
            } => {
                if exponent.fract() == 0.0 && (*exponent as i64) % 2 == 0 && *exponent >= 0.0 {
                    vec![]
                } else {
                    vec![(*center, *exponent)]
                }
            }
            ClosedForm::Sum(terms) => {
                let mut out: Vec<(Point, f64)> = Vec::new();
                for (_, f) in terms {
                    for (p, e) in f.local_exponents() {
                        match out.iter_mut().find(|(q, _)| *q == p) {
                            Some(q) => q.1 = q.1.min(e),
                            None => out.push((p, e)),
                        }
                    }
                }
                out
            }
            ClosedForm::Product(a, b) => {
                let mut out = a.local_exponents();
                for (p, e) in b.local_exponents() {
                    match out.iter_mut().find(|(q, _)| *q == p) {
                        Some(q) => q.1 += e,
                        None => out.push((p, e)),
                    }
                }
                out
            }
            _ => vec![],
        }
    }

    /// Points where the function fails to be smooth.
    pub fn singular_points(&self) -> Vec<Point> {
        match self {
            ClosedForm::Cusp {
                center, exponent, ..
            } => {
                if exponent.fract() == 0.0 && (*exponent as i64) % 2 == 0 {
                    vec![]
                } else {
                    vec![*center]
                }
            }
            ClosedForm::Sum(terms) => terms
                .iter()
                .flat_map(|(_, f)| f.singular_points())
                .collect(),
            ClosedForm::Product(a, b) => {
                let mut v = a.singular_points();
                v.extend(b.singular_points());
                v
            }
            _ => vec![],
        }
    }

    /// Breakpoints along axis `axis` useful for quadrature (cusp centers, bump edges).
    pub fn breakpoints(&self, axis: usize) -> Vec<f64> {
        match self {
            ClosedForm::Cusp { center, .. } => vec![center[axis]],
            ClosedForm::Bump { center, radius, .. } => {
                vec![center[axis] - radius, center[axis], center[axis] + radius]
            }
            ClosedForm::Sum(terms) => terms
                .iter()
                .flat_map(|(_, f)| f.breakpoints(axis))
                .collect(),
            ClosedForm::Product(a, b) => {
                let mut v = a.breakpoints(axis);
                v.extend(b.breakpoints(axis));
                v
            }
            _ => vec![],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_derivatives_match_finite_differences() {
        let f = |y: f64| bump_derivatives_1d(y, 0.1, 0.8, 1.0, 0)[0];
        let y = 0.37;
        let d = bump_derivatives_1d(y, 0.1, 0.8, 1.0, 3);
        let h = 1e-4;
        let fd1 = (f(y + h) - f(y - h)) / (2.0 * h);
        let fd2 = (f(y + h) - 2.0 * f(y) + f(y - h)) / (h * h);
        assert!((d[1] - fd1).abs() < 1e-7);
        assert!((d[2] - fd2).abs() < 1e-5);
        assert_eq!(bump_derivatives_1d(0.95, 0.1, 0.8, 1.0, 3), vec![0.0; 4]);
    }

    #[test]
    fn cusp_derivatives_at_center() {
        let f = ClosedForm::cusp([0.0, 0.0], 1.5);
        let j = f.jet(&[0.0, 0.0], 1, 1).unwrap();
        assert_eq!(j.get([0, 0]), 0.0);
        assert_eq!(j.get([1, 0]), 0.0);
        assert!(f.jet(&[0.0, 0.0], 1, 2).is_err());
        let j = f.jet(&[-0.25, 0.0], 1, 1).unwrap();
        assert!((j.get([1, 0]) + 1.5 * 0.5).abs() < 1e-14);
    }

    #[test]
    fn unit_bump_is_one_at_center() {
        let b = ClosedForm::unit_bump([0.2, -0.1], 0.3, 2);
        assert!((b.value(&[0.2, -0.1], 2) - 1.0).abs() < 1e-15);
        let b = ClosedForm::unit_bump([0.2, 0.0], 0.3, 1);
        assert!((b.value(&[0.2, 0.0], 1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn product_jet_uses_leibniz() {
        let f = ClosedForm::Polynomial {
            center: 0.0,
            coeffs: vec![1.0, 2.0],
        }
        .times(ClosedForm::Polynomial {
            center: 0.0,
            coeffs: vec![0.0, 0.0, 1.0],
        });
        // (1 + 2y) y^2 = y^2 + 2y^3 ; second derivative at 1: 2 + 12 = 14
        let j = f.jet(&[1.0, 0.0], 1, 2).unwrap();
        assert!((j.get([2, 0]) - 14.0).abs() < 1e-12);
    }
}
