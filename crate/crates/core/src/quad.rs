//! Numerical quadrature: globally adaptive Gauss–Kronrod (21 point) and
//! fixed Gauss–Legendre panels.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_22,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_725,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_96,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_84,
    0.134_709_217_311_473_34,
    0.142_775_938_577_060_09,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

/// Absolute error floor applied to every adaptive integral.
pub const ABS_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            rel_tol: 1e-11,
            abs_tol: ABS_FLOOR,
            max_intervals: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[10];
    let mut gauss = 0.0;
    for i in 0..10 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrate `f` over `[a, b]`, splitting first at every breakpoint inside the interval.
///
/// Refinement is global: the piece with the largest error estimate is bisected
/// until the summed estimate meets the tolerance, so pieces adjacent to an
/// endpoint singularity are refined dyadically toward it.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    opts: QuadOptions,
) -> Integral {
    if b <= a {
        return Integral {
            value: 0.0,
            error: 0.0,
        };
    }
    let mut cuts = vec![a];
    let mut inner: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&p| p > a && p < b)
        .collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    cuts.extend(inner);
    cuts.push(b);

    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in cuts.windows(2) {
        let (v, e) = gk21(&f, w[0], w[1]);
        total += v;
        total_err += e;
        heap.push(Piece {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
        });
    }
    while total_err > opts.abs_tol.max(opts.rel_tol * total.abs())
        && heap.len() < opts.max_intervals
    {
        let Some(worst) = heap.pop() else { break };
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk21(&f, worst.a, m);
        let (v2, e2) = gk21(&f, m, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Piece {
            a: worst.a,
            b: m,
            value: v1,
            error: e1,
        });
        heap.push(Piece {
            a: m,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // Re-sum to shed accumulated cancellation from the running updates.
    let value = heap.iter().map(|p| p.value).sum();
    let error = heap.iter().map(|p| p.error).sum();
    Integral { value, error }
}

/// `∫_0^T t^a h(t) dt` for `a > -1`, with the substitution `t = s^{1/(1+a)}`
/// that turns the endpoint power into a bounded integrand.
pub fn integrate_power_endpoint<F: Fn(f64) -> f64>(
    h: F,
    exponent: f64,
    upper: f64,
    opts: QuadOptions,
) -> Integral {
    assert!(exponent > -1.0, "endpoint power must be integrable");
    if upper <= 0.0 {
        return Integral {
            value: 0.0,
            error: 0.0,
        };
    }
    let e1 = 1.0 + exponent;
    let m = 1.0 / e1;
    let s_max = upper.powf(e1);
    let g = |s: f64| h(s.powf(m)) * m;
    integrate(g, 0.0, s_max, &[], opts)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Newton iteration on `P_n`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 {
                1.0
            } else if n == 1 {
                z
            } else {
                p1
            };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Composite Gauss–Legendre nodes over consecutive panels given by `cuts`.
pub fn composite_nodes(cuts: &[f64], points_per_panel: usize) -> Vec<(f64, f64)> {
    let (gx, gw) = gauss_legendre(points_per_panel);
    let mut out = Vec::with_capacity(cuts.len() * points_per_panel);
    for win in cuts.windows(2) {
        let (a, b) = (win[0], win[1]);
        if b <= a {
            continue;
        }
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        for (x, w) in gx.iter().zip(&gw) {
            out.push((c + h * x, h * w));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(
            |x| x * x * x - 2.0 * x + 1.0,
            -1.0,
            2.0,
            &[],
            QuadOptions::default(),
        );
        // ∫ = [x^4/4 - x^2 + x] from -1 to 2 = (4 - 4 + 2) - (1/4 - 1 - 1)
        assert!((r.value - 3.75).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity_with_breakpoint() {
        // ∫_{-1}^{1} |x|^{-1/2} dx = 4
        let r = integrate(
            |x: f64| x.abs().powf(-0.5),
            -1.0,
            1.0,
            &[0.0],
            QuadOptions::default(),
        );
        assert!((r.value - 4.0).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn power_endpoint_substitution() {
        // ∫_0^1 t^{-0.75} cos t dt, reference via series Σ (-1)^k / ((2k)! (2k + 1/4))
        let mut reference = 0.0;
        let mut fact = 1.0;
        for k in 0..20 {
            if k > 0 {
                fact *= (2 * k - 1) as f64 * (2 * k) as f64;
            }
            reference += (-1f64).powi(k) / (fact * (2.0 * k as f64 + 0.25));
        }
        let r = integrate_power_endpoint(f64::cos, -0.75, 1.0, QuadOptions::default());
        assert!((r.value - reference).abs() < 1e-11 * reference);
    }

    #[test]
    fn gauss_legendre_weights_sum_to_two() {
        for n in [1, 2, 5, 8, 16] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            // exact for degree 2n-1
            let m: f64 = x
                .iter()
                .zip(&w)
                .map(|(x, w)| w * x.powi(2 * n as i32 - 2))
                .sum();
            assert!((m - 2.0 / (2 * n - 1) as f64).abs() < 1e-12, "n={n}");
        }
    }
}
