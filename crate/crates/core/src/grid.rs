//! Periodic grids on `[-1, 1)^d` and spectral rendering of kernels.
//!
//! Node `i` sits at `-1 + i h` with `h = 2/n`; the DFT index `k` (wrapped to
//! `[-n/2, n/2)`) corresponds to the angular frequency `ξ = π k`. Function-type
//! kernels are rendered as cell averages, delta derivatives through their
//! exact Fourier symbol `h^{-d} (iξ)^k e^{-iξ(c+1)}`.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::closed_form::ClosedForm;
use crate::error::{Error, Result};
use crate::jet::{binomial, MultiIndex};
use crate::kernels::{integrate_1d, DistributionExpr, Kind};
use crate::quad::gauss_legendre;
use crate::region::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeriodicGrid {
    pub dim: usize,
    pub n: usize,
}

impl PeriodicGrid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidInput(format!(
                "dimension {dim} not supported"
            )));
        }
        if !n.is_power_of_two() || n < 8 {
            return Err(Error::InvalidInput(format!(
                "grid size {n} must be a power of two >= 8"
            )));
        }
        Ok(PeriodicGrid { dim, n })
    }

    /// Default analysis grid: `2^12` nodes in 1D, `2^9` per axis in 2D.
    pub fn standard(dim: usize) -> Self {
        PeriodicGrid {
            dim,
            n: if dim == 1 { 1 << 12 } else { 1 << 9 },
        }
    }

    pub fn spacing(&self) -> f64 {
        2.0 / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, i: usize) -> f64 {
        -1.0 + i as f64 * self.spacing()
    }

    /// Wrapped DFT index.
    pub fn wavenumber(&self, k: usize) -> i64 {
        if k < self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    pub fn frequency(&self, k: usize) -> f64 {
        std::f64::consts::PI * self.wavenumber(k) as f64
    }

    /// Largest resolved angular frequency along an axis.
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI * (self.n / 2) as f64
    }

    /// Frequency vector of flat index `idx`.
    pub fn xi(&self, idx: usize) -> Point {
        if self.dim == 1 {
            [self.frequency(idx), 0.0]
        } else {
            [self.frequency(idx / self.n), self.frequency(idx % self.n)]
        }
    }

    pub fn xi_norm(&self, idx: usize) -> f64 {
        let x = self.xi(idx);
        x[0].hypot(x[1])
    }

    /// Physical coordinates of flat index `idx`.
    pub fn point(&self, idx: usize) -> Point {
        if self.dim == 1 {
            [self.node(idx), 0.0]
        } else {
            [self.node(idx / self.n), self.node(idx % self.n)]
        }
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let mut planner = FftPlanner::new();
        let fft = if inverse {
            planner.plan_fft_inverse(self.n)
        } else {
            planner.plan_fft_forward(self.n)
        };
        if self.dim == 1 {
            fft.process(data);
        } else {
            data.par_chunks_mut(self.n).for_each(|row| fft.process(row));
            let n = self.n;
            let mut col = vec![Complex64::new(0.0, 0.0); n];
            for c in 0..n {
                for r in 0..n {
                    col[r] = data[r * n + c];
                }
                fft.process(&mut col);
                for r in 0..n {
                    data[r * n + c] = col[r];
                }
            }
        }
    }

    /// Unnormalized forward DFT of real samples.
    pub fn forward(&self, field: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = field.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, false);
        data
    }

    /// Inverse DFT (normalized), real part.
    pub fn inverse_real(&self, spectrum: &[Complex64]) -> Vec<f64> {
        let mut data = spectrum.to_vec();
        self.transform(&mut data, true);
        let norm = 1.0 / self.len() as f64;
        data.into_iter().map(|c| c.re * norm).collect()
    }

    /// `(Σ |f|^p h^d)^{1/p}`, or the max for `p = ∞`.
    pub fn lp_norm(&self, field: &[f64], p: f64) -> f64 {
        if p.is_infinite() {
            return field.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        }
        let h = self.spacing().powi(self.dim as i32);
        (field.iter().map(|v| v.abs().powf(p)).sum::<f64>() * h).powf(1.0 / p)
    }
}

/// A delta derivative `w ∂^k δ_c`.
struct Atom {
    weight: f64,
    center: Point,
    derivative: MultiIndex,
}

/// Spectrum `U_k` of the kernel on the grid, consistent with [`PeriodicGrid::forward`]
/// applied to node samples.
pub fn render_spectrum(u: &DistributionExpr, grid: &PeriodicGrid) -> Result<Vec<Complex64>> {
    if u.dim() != grid.dim {
        return Err(Error::DomainMismatch(format!(
            "{}-dimensional kernel on a {}-dimensional grid",
            u.dim(),
            grid.dim
        )));
    }
    let mut field = vec![0.0; grid.len()];
    let mut atoms = Vec::new();
    collect(u, 1.0, None, grid, &mut field, &mut atoms)?;
    let mut spec = grid.forward(&field);
    let scale = grid.spacing().powi(-(grid.dim as i32));
    spec.par_iter_mut().enumerate().for_each(|(idx, s)| {
        let xi = grid.xi(idx);
        for a in &atoms {
            let mut phase = 0.0;
            for (x, c) in xi.iter().zip(&a.center).take(grid.dim) {
                phase -= x * (c + 1.0);
            }
            let mut sym = Complex64::new(a.weight * scale, 0.0) * Complex64::from_polar(1.0, phase);
            for (x, &k) in xi.iter().zip(&a.derivative).take(grid.dim) {
                for _ in 0..k {
                    sym *= Complex64::new(0.0, *x);
                }
            }
            *s += sym;
        }
    });
    Ok(spec)
}

/// Node-sample field of the kernel (inverse transform of the spectrum).
pub fn render_field(u: &DistributionExpr, grid: &PeriodicGrid) -> Result<Vec<f64>> {
    Ok(grid.inverse_real(&render_spectrum(u, grid)?))
}

fn check_band(f: &ClosedForm, grid: &PeriodicGrid) -> Result<()> {
    let k = f.max_frequency();
    if k > grid.nyquist() {
        return Err(Error::Aliasing(format!(
            "frequency {k} exceeds the grid Nyquist frequency {}",
            grid.nyquist()
        )));
    }
    Ok(())
}

fn collect(
    u: &DistributionExpr,
    weight: f64,
    factor: Option<&ClosedForm>,
    grid: &PeriodicGrid,
    field: &mut [f64],
    atoms: &mut Vec<Atom>,
) -> Result<()> {
    if let Some(f) = factor {
        check_band(f, grid)?;
    }
    if let Kind::Smooth(f) = u.kind() {
        check_band(f, grid)?;
    }
    if u.is_function() {
        let density = match factor {
            Some(f) => crate::kernels::multiply_by_smooth(u, f.clone())?,
            None => u.clone(),
        };
        let cells = cell_averages(&density, grid);
        for (o, c) in field.iter_mut().zip(cells) {
            *o += weight * c;
        }
        return Ok(());
    }
    let factor_at = |p: &Point| factor.map_or(1.0, |f| f.value(p, grid.dim));
    match u.kind() {
        Kind::Sum(terms) => {
            for (w, t) in terms {
                collect(t, weight * w, factor, grid, field, atoms)?;
            }
            Ok(())
        }
        Kind::SmoothProduct { factor: f2, base } => {
            let combined = match factor {
                Some(f) => f.clone().times(f2.clone()),
                None => f2.clone(),
            };
            collect(base, weight, Some(&combined), grid, field, atoms)
        }
        Kind::DiracDelta { center, derivative } => {
            let Some(f) = factor else {
                atoms.push(Atom {
                    weight,
                    center: *center,
                    derivative: *derivative,
                });
                return Ok(());
            };
            // f ∂^k δ_c = Σ_{m ≤ k} C(k,m) (-1)^{|k-m|} ∂^{k-m} f(c) ∂^m δ_c
            let order = derivative[0] + derivative[1];
            let jet = f.jet(center, grid.dim, order)?;
            for m0 in 0..=derivative[0] {
                for m1 in 0..=derivative[1] {
                    let rest = [derivative[0] - m0, derivative[1] - m1];
                    let sign = if (rest[0] + rest[1]) % 2 == 1 {
                        -1.0
                    } else {
                        1.0
                    };
                    let c = binomial(derivative[0], m0)
                        * binomial(derivative[1], m1)
                        * sign
                        * jet.get(rest);
                    if c != 0.0 {
                        atoms.push(Atom {
                            weight: weight * c,
                            center: *center,
                            derivative: [m0, m1],
                        });
                    }
                }
            }
            Ok(())
        }
        Kind::LogDerivative { center } | Kind::SignedLogDerivative { center } => {
            let signed = matches!(u.kind(), Kind::SignedLogDerivative { .. });
            let h = grid.spacing();
            let w = |t: f64| -> f64 {
                let l = t.abs().ln();
                if signed {
                    t.signum() * l
                } else {
                    l
                }
            };
            for (i, o) in field.iter_mut().enumerate() {
                let x = grid.node(i);
                let (a, b) = (x - 0.5 * h - center[0], x + 0.5 * h - center[0]);
                // cell average of W' is (W(b) - W(a))/h, which is also the
                // principal-value / finite-part average on the cell around c
                let avg = (w(b) - w(a)) / h;
                *o += weight * factor_at(&[x, 0.0]) * avg;
            }
            Ok(())
        }
        Kind::Grid(g) => {
            let matches = g.sizes[0] == grid.n
                && (grid.dim == 1 || g.sizes[1] == grid.n)
                && (g.spacing - grid.spacing()).abs() < 1e-15
                && (0..grid.dim).all(|i| (g.lower[i] + 1.0).abs() < 1e-15);
            if !matches {
                return Err(Error::DomainMismatch(
                    "grid field does not match the analysis grid".into(),
                ));
            }
            for (idx, o) in field.iter_mut().enumerate() {
                *o += weight * factor_at(&grid.point(idx)) * g.samples[idx];
            }
            Ok(())
        }
        _ => Err(Error::InvalidInput(format!(
            "kernel {} cannot be rendered on a grid",
            u.label()
        ))),
    }
}

/// Cell averages `h^{-d} ∫_cell u` of a function-type kernel.
fn cell_averages(u: &DistributionExpr, grid: &PeriodicGrid) -> Vec<f64> {
    let h = grid.spacing();
    let sing = u.local_exponents();
    let dens = |p: &Point| u.density(p).unwrap_or(0.0);
    if grid.dim == 1 {
        return (0..grid.n)
            .into_par_iter()
            .map(|i| {
                let x = grid.node(i);
                let (a, b) = (x - 0.5 * h, x + 0.5 * h);
                let cuts: Vec<f64> = sing.iter().map(|(p, _)| p[0]).collect();
                integrate_1d(|t| dens(&[t, 0.0]), a, b, cuts, &sing) / h
            })
            .collect();
    }
    let (gx, gw) = gauss_legendre(4);
    (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let c = grid.point(idx);
            let near = sing
                .iter()
                .filter(|(_, e)| *e < 0.0)
                .find(|(p, _)| (p[0] - c[0]).abs() <= 0.5 * h && (p[1] - c[1]).abs() <= 0.5 * h);
            if let Some((p, e)) = near {
                if let Kind::PowerLaw { .. } = u.kind() {
                    if (p[0] - c[0]).abs() < 1e-14 && (p[1] - c[1]).abs() < 1e-14 {
                        return (0.5 * h).powf(*e) * square_power_mean(*e);
                    }
                }
                // off-center singular cell: fine midpoint sampling
                let m = 16;
                let mut acc = 0.0;
                for a in 0..m {
                    for b in 0..m {
                        let y = [
                            c[0] - 0.5 * h + (a as f64 + 0.5) * h / m as f64,
                            c[1] - 0.5 * h + (b as f64 + 0.5) * h / m as f64,
                        ];
                        acc += dens(&y);
                    }
                }
                return acc / (m * m) as f64;
            }
            let close = sing
                .iter()
                .any(|(p, _)| (p[0] - c[0]).abs() <= 2.5 * h && (p[1] - c[1]).abs() <= 2.5 * h);
            if !close {
                return dens(&c);
            }
            let mut acc = 0.0;
            for (xa, wa) in gx.iter().zip(&gw) {
                for (xb, wb) in gx.iter().zip(&gw) {
                    acc += wa * wb * dens(&[c[0] + 0.5 * h * xa, c[1] + 0.5 * h * xb]);
                }
            }
            acc / 4.0
        })
        .collect()
}

/// Mean of `|y|^e` over the square `[-1, 1]^2`.
fn square_power_mean(e: f64) -> f64 {
    // (1/4)·8 ∫_0^{π/4} ∫_0^{sec θ} r^{e+1} dr dθ = 2/(e+2) ∫_0^{π/4} sec^{e+2} θ dθ
    let g = |t: f64| t.cos().powf(-(e + 2.0));
    let i =
        crate::quad::integrate(g, 0.0, std::f64::consts::FRAC_PI_4, &[], Default::default()).value;
    2.0 / (e + 2.0) * i
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_at_node_has_flat_spectrum() {
        let g = PeriodicGrid::new(1, 64).unwrap();
        let s = render_spectrum(&DistributionExpr::delta(1, [0.0, 0.0]), &g).unwrap();
        // phase e^{-iξ} at c = 0 alternates with k
        for (k, v) in s.iter().enumerate() {
            assert!((v.norm() - 32.0).abs() < 1e-9, "k={k}");
        }
        let f = g.inverse_real(&s);
        assert!((f[32] - 32.0).abs() < 1e-9);
        assert!(f[31].abs() < 1e-9);
    }

    #[test]
    fn constant_renders_exactly() {
        let g = PeriodicGrid::new(2, 16).unwrap();
        let f = render_field(&DistributionExpr::constant(2, 1.0), &g).unwrap();
        assert!(f.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn smooth_times_delta_uses_leibniz() {
        let g = PeriodicGrid::new(1, 32).unwrap();
        let f = ClosedForm::Polynomial {
            center: 0.0,
            coeffs: vec![2.0, 3.0],
        };
        let u = crate::kernels::multiply_by_smooth(
            &DistributionExpr::delta_derivative(1, [0.0, 0.0], [1, 0]),
            f,
        )
        .unwrap();
        let expect = DistributionExpr::sum(vec![
            (
                2.0,
                DistributionExpr::delta_derivative(1, [0.0, 0.0], [1, 0]),
            ),
            (-3.0, DistributionExpr::delta(1, [0.0, 0.0])),
        ])
        .unwrap();
        let a = render_spectrum(&u, &g).unwrap();
        let b = render_spectrum(&expect, &g).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-9);
        }
    }

    #[test]
    fn power_law_cell_average_matches_quadrature() {
        let m = square_power_mean(-1.0);
        // ∫_{[-1,1]^2} |y|^{-1} = 8 ln(1 + √2)
        assert!((m * 4.0 - 8.0 * (1.0 + 2f64.sqrt()).ln()).abs() < 1e-10);
    }

    #[test]
    fn aliasing_is_reported() {
        let g = PeriodicGrid::new(1, 16).unwrap();
        let u = DistributionExpr::smooth(
            1,
            ClosedForm::Cosine {
                wavevector: [100.0, 0.0],
                phase: 0.0,
            },
        );
        assert!(matches!(render_spectrum(&u, &g), Err(Error::Aliasing(_))));
    }
}
