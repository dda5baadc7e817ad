//! Distributions on `R^d` (`d ∈ {1, 2}`) and their dual pairings `u(φ)`.
//!
//! Symbolic kernels are defined on all of `R^d`; only grid-backed fields are
//! tied to a bounded domain. Function-type kernels (power laws, closed forms,
//! pointwise products of these) are paired by adaptive quadrature with the
//! singular points split out and an endpoint substitution that removes the
//! local power behaviour.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::closed_form::ClosedForm;
use crate::error::{Error, Result};
use crate::jet::{multi_indices, Jet, MultiIndex};
use crate::quad::{integrate, integrate_power_endpoint, QuadOptions};
use crate::region::{distance, Point, Region};
use crate::testfn::TestFunction;

/// Singular support metadata.
#[derive(Debug, Clone, PartialEq)]
pub enum SingularSupport {
    Points(Vec<Point>),
    Everywhere,
}

impl SingularSupport {
    pub fn points(&self) -> Option<&[Point]> {
        match self {
            SingularSupport::Points(p) => Some(p),
            SingularSupport::Everywhere => None,
        }
    }

    pub fn is_everywhere(&self) -> bool {
        matches!(self, SingularSupport::Everywhere)
    }

    fn union(self, other: SingularSupport, dim: usize) -> SingularSupport {
        match (self, other) {
            (SingularSupport::Points(mut a), SingularSupport::Points(b)) => {
                for p in b {
                    if !a.iter().any(|q| distance(q, &p, dim) < 1e-12) {
                        a.push(p);
                    }
                }
                SingularSupport::Points(a)
            }
            _ => SingularSupport::Everywhere,
        }
    }
}

/// Exponents a kernel is known to have; informational only.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DeclaredExponents {
    pub holder: Option<f64>,
    pub beta_star: Option<f64>,
}

/// Samples on a regular grid `lower + i·spacing`, row-major with axis 0 slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub dim: usize,
    pub sizes: [usize; 2],
    pub lower: Point,
    pub spacing: f64,
    pub samples: Vec<f64>,
}

impl GridField {
    pub fn new(
        dim: usize,
        sizes: [usize; 2],
        lower: Point,
        spacing: f64,
        samples: Vec<f64>,
    ) -> Result<Self> {
        let sizes = if dim == 1 { [sizes[0], 1] } else { sizes };
        for &n in sizes.iter().take(dim) {
            if !n.is_power_of_two() {
                return Err(Error::InvalidInput(format!(
                    "grid size {n} is not a power of two"
                )));
            }
        }
        if samples.len() != sizes[0] * sizes[1] {
            return Err(Error::InvalidInput(format!(
                "expected {} samples, found {}",
                sizes[0] * sizes[1],
                samples.len()
            )));
        }
        if spacing <= 0.0 {
            return Err(Error::InvalidInput("grid spacing must be positive".into()));
        }
        Ok(GridField {
            dim,
            sizes,
            lower,
            spacing,
            samples,
        })
    }

    pub fn region(&self) -> Region {
        let mut upper = [0.0; 2];
        let mut lower = [0.0; 2];
        for i in 0..self.dim {
            lower[i] = self.lower[i];
            upper[i] = self.lower[i] + self.sizes[i] as f64 * self.spacing;
        }
        Region::Box {
            dim: self.dim,
            lower,
            upper,
        }
    }

    pub fn node(&self, i: usize, axis: usize) -> f64 {
        self.lower[axis] + i as f64 * self.spacing
    }

    pub fn sample(&self, i0: usize, i1: usize) -> f64 {
        self.samples[i0 * self.sizes[1] + i1]
    }

    fn index_range(&self, lo: f64, hi: f64, axis: usize) -> std::ops::Range<usize> {
        let a = ((lo - self.lower[axis]) / self.spacing).floor().max(0.0) as usize;
        let b =
            (((hi - self.lower[axis]) / self.spacing).ceil() as usize + 1).min(self.sizes[axis]);
        a..b.max(a)
    }

    /// Trapezoidal (node-sum) pairing; the test function vanishes at the box edges.
    fn pair(&self, phi: &TestFunction) -> Result<f64> {
        let (lo, hi) = phi.support_box();
        let (dlo, dhi) = self.region().bounding_box();
        for i in 0..self.dim {
            if lo[i] < dlo[i] - 1e-12 || hi[i] > dhi[i] + 1e-12 {
                return Err(Error::DomainMismatch(format!(
                    "test function support [{}, {}] leaves the grid domain on axis {i}",
                    lo[i], hi[i]
                )));
            }
        }
        let h = self.spacing.powi(self.dim as i32);
        let mut acc = 0.0;
        for i0 in self.index_range(lo[0], hi[0], 0) {
            let x = self.node(i0, 0);
            if self.dim == 1 {
                acc += self.sample(i0, 0) * phi.value(&[x, 0.0]);
            } else {
                for i1 in self.index_range(lo[1], hi[1], 1) {
                    acc += self.sample(i0, i1) * phi.value(&[x, self.node(i1, 1)]);
                }
            }
        }
        Ok(acc * h)
    }
}

#[derive(Debug, Clone)]
pub enum Kind {
    /// `|y - c|^a`.
    PowerLaw {
        center: Point,
        exponent: f64,
    },
    /// `∂^k δ_c`, paired as `(-1)^{|k|} ∂^k φ(c)`.
    DiracDelta {
        center: Point,
        derivative: MultiIndex,
    },
    /// `(d/dy) log|y - c|`, paired as `-∫ log|y - c| φ'(y) dy`.
    LogDerivative {
        center: Point,
    },
    /// `(d/dy)(sgn(y - c) log|y - c|)`, paired as `-∫ sgn(y - c) log|y - c| φ'(y) dy`.
    /// Away from `c` it is the function `|y - c|^{-1}`.
    SignedLogDerivative {
        center: Point,
    },
    Smooth(ClosedForm),
    Grid(GridField),
    Sum(Vec<(f64, DistributionExpr)>),
    /// `f · u`, paired as `u(f φ)`.
    SmoothProduct {
        factor: ClosedForm,
        base: DistributionExpr,
    },
    /// Pointwise product of two function-type kernels.
    Pointwise(DistributionExpr, DistributionExpr),
    /// `t ∘ W + Σ a_α ∂^α δ_c` where `W φ = φ - Σ ∂^α φ(c) ψ_α`.
    Renormalized {
        base: DistributionExpr,
        center: Point,
        jets: Vec<(MultiIndex, TestFunction)>,
        coeffs: Vec<(MultiIndex, f64)>,
    },
}

/// A distribution with its declared singular support.
#[derive(Debug, Clone)]
pub struct DistributionExpr {
    dim: usize,
    kind: Arc<Kind>,
    singsupp: SingularSupport,
    declared: DeclaredExponents,
    label: String,
}

/// Quadrature settings for symbolic pairings.
fn opts() -> QuadOptions {
    QuadOptions {
        rel_tol: 1e-12,
        ..QuadOptions::default()
    }
}

/// Nested 2D quadrature trades accuracy for cost.
fn outer_opts_2d() -> QuadOptions {
    QuadOptions {
        rel_tol: 1e-7,
        max_intervals: 400,
        ..QuadOptions::default()
    }
}

fn inner_opts_2d() -> QuadOptions {
    QuadOptions {
        rel_tol: 1e-8,
        max_intervals: 200,
        ..QuadOptions::default()
    }
}

impl DistributionExpr {
    fn new(dim: usize, kind: Kind, singsupp: SingularSupport, label: String) -> Self {
        DistributionExpr {
            dim,
            kind: Arc::new(kind),
            singsupp,
            declared: DeclaredExponents::default(),
            label,
        }
    }

    pub fn delta(dim: usize, center: Point) -> Self {
        Self::delta_derivative(dim, center, [0, 0])
    }

    pub fn delta_derivative(dim: usize, center: Point, derivative: MultiIndex) -> Self {
        let label = if derivative == [0, 0] {
            format!("delta@{}", fmt_point(&center, dim))
        } else {
            format!("delta{:?}@{}", &derivative[..dim], fmt_point(&center, dim))
        };
        let order = (derivative[0] + derivative[1]) as f64;
        let mut d = Self::new(
            dim,
            Kind::DiracDelta { center, derivative },
            SingularSupport::Points(vec![center]),
            label,
        );
        d.declared = DeclaredExponents {
            holder: Some(-(dim as f64) - order),
            beta_star: Some(-(dim as f64) / 2.0 - order),
        };
        d
    }

    pub fn power_law(dim: usize, center: Point, exponent: f64) -> Self {
        let mut d = Self::new(
            dim,
            Kind::PowerLaw { center, exponent },
            SingularSupport::Points(vec![center]),
            format!("powerlaw@{}:{}", fmt_point(&center, dim), exponent),
        );
        if exponent > -(dim as f64) && exponent < 0.0 {
            d.declared = DeclaredExponents {
                holder: Some(exponent),
                beta_star: Some((exponent + dim as f64 / 2.0).min(0.0)),
            };
        }
        d
    }

    pub fn log_derivative(center: Point) -> Self {
        Self::new(
            1,
            Kind::LogDerivative { center },
            SingularSupport::Points(vec![center]),
            format!("logderiv@{}", center[0]),
        )
    }

    pub fn signed_log_derivative(center: Point) -> Self {
        Self::new(
            1,
            Kind::SignedLogDerivative { center },
            SingularSupport::Points(vec![center]),
            format!("signedlogderiv@{}", center[0]),
        )
    }

    pub fn smooth(dim: usize, f: ClosedForm) -> Self {
        let pts = f.singular_points();
        Self::new(
            dim,
            Kind::Smooth(f),
            SingularSupport::Points(pts),
            "smooth".into(),
        )
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self::smooth(dim, ClosedForm::Constant(c)).with_label(if c == 1.0 {
            "constant-1".to_string()
        } else {
            format!("constant:{c}")
        })
    }

    pub fn grid(field: GridField, singsupp: SingularSupport) -> Self {
        let dim = field.dim;
        Self::new(dim, Kind::Grid(field), singsupp, "grid".into())
    }

    /// Gaussian white noise sample `N(0,1)/sqrt(h^d)` on `[-1, 1)^d` with `n` nodes per axis.
    pub fn white_noise(dim: usize, n: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = 2.0 / n as f64;
        let count = if dim == 1 { n } else { n * n };
        let scale = h.powf(-(dim as f64) / 2.0);
        let samples: Vec<f64> = (0..count)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z * scale
            })
            .collect();
        let field = GridField::new(dim, [n, n], [-1.0, -1.0], h, samples)?;
        let mut d =
            Self::grid(field, SingularSupport::Everywhere).with_label(format!("whitenoise:{seed}"));
        d.declared = DeclaredExponents {
            holder: Some(-(dim as f64) / 2.0),
            beta_star: None,
        };
        Ok(d)
    }

    pub fn sum(terms: Vec<(f64, DistributionExpr)>) -> Result<Self> {
        let Some(first) = terms.first() else {
            return Err(Error::InvalidInput("empty sum".into()));
        };
        let dim = first.1.dim;
        if terms.iter().any(|(_, t)| t.dim != dim) {
            return Err(Error::DomainMismatch(
                "sum of kernels of different dimension".into(),
            ));
        }
        let mut ss = SingularSupport::Points(vec![]);
        for (_, t) in &terms {
            ss = ss.union(t.singsupp.clone(), dim);
        }
        let label = terms
            .iter()
            .map(|(w, t)| {
                if *w == 1.0 {
                    t.label.clone()
                } else {
                    format!("{w}*{}", t.label)
                }
            })
            .collect::<Vec<_>>()
            .join("+");
        Ok(Self::new(dim, Kind::Sum(terms), ss, label))
    }

    /// `w · u`.
    pub fn scaled(&self, w: f64) -> Self {
        let mut d = Self::new(
            self.dim,
            Kind::Sum(vec![(w, self.clone())]),
            self.singsupp.clone(),
            format!("{w}*{}", self.label),
        );
        d.declared = self.declared;
        d
    }

    /// Pointwise product of two function-type kernels.
    pub fn pointwise(a: &DistributionExpr, b: &DistributionExpr) -> Result<Self> {
        if a.dim != b.dim {
            return Err(Error::DomainMismatch(
                "pointwise product of different dimensions".into(),
            ));
        }
        if !a.is_function() || !b.is_function() {
            return Err(Error::InvalidInput(format!(
                "pointwise product needs function-type kernels, got {} and {}",
                a.label, b.label
            )));
        }
        // same-center power laws combine into a single power law
        if let (
            Kind::PowerLaw {
                center: c1,
                exponent: e1,
            },
            Kind::PowerLaw {
                center: c2,
                exponent: e2,
            },
        ) = (&*a.kind, &*b.kind)
        {
            if distance(c1, c2, a.dim) == 0.0 {
                return Ok(Self::power_law(a.dim, *c1, e1 + e2));
            }
        }
        let ss = a.singsupp.clone().union(b.singsupp.clone(), a.dim);
        Ok(Self::new(
            a.dim,
            Kind::Pointwise(a.clone(), b.clone()),
            ss,
            format!("({})*({})", a.label, b.label),
        ))
    }

    /// `t ∘ W + Σ a_α ∂^α δ_c`.
    pub fn renormalized(
        base: &DistributionExpr,
        center: Point,
        jets: Vec<(MultiIndex, TestFunction)>,
        coeffs: Vec<(MultiIndex, f64)>,
    ) -> Self {
        let ss = base
            .singsupp
            .clone()
            .union(SingularSupport::Points(vec![center]), base.dim);
        Self::new(
            base.dim,
            Kind::Renormalized {
                base: base.clone(),
                center,
                jets,
                coeffs,
            },
            ss,
            format!("ext[{}]", base.label),
        )
    }

    /// `y ↦ u(y - t)`, for kernels with explicit centers.
    pub fn translated(&self, t: &Point) -> Result<Self> {
        let sh = |c: &Point| [c[0] + t[0], c[1] + t[1]];
        let out = match &*self.kind {
            Kind::PowerLaw { center, exponent } => Self::power_law(self.dim, sh(center), *exponent),
            Kind::DiracDelta { center, derivative } => {
                Self::delta_derivative(self.dim, sh(center), *derivative)
            }
            Kind::Smooth(f) => Self::smooth(self.dim, f.translated(t)),
            Kind::Sum(terms) => Self::sum(
                terms
                    .iter()
                    .map(|(w, u)| Ok((*w, u.translated(t)?)))
                    .collect::<Result<Vec<_>>>()?,
            )?,
            Kind::Pointwise(a, b) => Self::pointwise(&a.translated(t)?, &b.translated(t)?)?,
            Kind::SmoothProduct { factor, base } => {
                multiply_by_smooth(&base.translated(t)?, factor.translated(t))?
            }
            _ => {
                return Err(Error::InvalidInput(format!(
                    "cannot translate {}",
                    self.label
                )));
            }
        };
        Ok(out.with_declared(self.declared))
    }

    /// `λ^{-d} u(·/λ)`, paired as `φ ↦ u(φ(λ·))`.
    pub fn dilated(&self, lambda: f64) -> Result<Self> {
        if lambda.is_nan() || lambda <= 0.0 {
            return Err(Error::InvalidInput(
                "dilation factor must be positive".into(),
            ));
        }
        let d = self.dim as f64;
        let sc = |c: &Point| [lambda * c[0], lambda * c[1]];
        let out = match &*self.kind {
            Kind::PowerLaw { center, exponent } => {
                Self::power_law(self.dim, sc(center), *exponent).scaled(lambda.powf(-d - exponent))
            }
            Kind::DiracDelta { center, derivative } => {
                let k = (derivative[0] + derivative[1]) as i32;
                let base = Self::delta_derivative(self.dim, sc(center), *derivative);
                if k == 0 {
                    base
                } else {
                    base.scaled(lambda.powi(k))
                }
            }
            Kind::Sum(terms) => Self::sum(
                terms
                    .iter()
                    .map(|(w, u)| Ok((*w, u.dilated(lambda)?)))
                    .collect::<Result<Vec<_>>>()?,
            )?,
            _ => {
                return Err(Error::InvalidInput(format!("cannot dilate {}", self.label)));
            }
        };
        Ok(out.with_label(format!("dil[{lambda}]{}", self.label)))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_declared(mut self, declared: DeclaredExponents) -> Self {
        self.declared = declared;
        self
    }

    pub fn with_singular_support(mut self, ss: SingularSupport) -> Self {
        self.singsupp = ss;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn declared(&self) -> DeclaredExponents {
        self.declared
    }

    pub fn singular_support(&self) -> &SingularSupport {
        &self.singsupp
    }

    /// Whether the kernel is given by a locally integrable (or punctured) density.
    pub fn is_function(&self) -> bool {
        match &*self.kind {
            Kind::PowerLaw { .. } | Kind::Smooth(_) | Kind::Pointwise(..) => true,
            Kind::SmoothProduct { base, .. } => base.is_function(),
            Kind::Sum(terms) => terms.iter().all(|(_, t)| t.is_function()),
            _ => false,
        }
    }

    /// Pointwise value of a function-type kernel.
    pub fn density(&self, y: &Point) -> Option<f64> {
        match &*self.kind {
            Kind::PowerLaw { center, exponent } => {
                Some(distance(y, center, self.dim).powf(*exponent))
            }
            Kind::Smooth(f) => Some(f.value(y, self.dim)),
            Kind::Pointwise(a, b) => Some(a.density(y)? * b.density(y)?),
            Kind::SmoothProduct { factor, base } => {
                Some(factor.value(y, self.dim) * base.density(y)?)
            }
            Kind::Sum(terms) => {
                let mut acc = 0.0;
                for (w, t) in terms {
                    acc += w * t.density(y)?;
                }
                Some(acc)
            }
            _ => None,
        }
    }

    /// Points where a function-type density may blow up, with the local power.
    pub fn local_exponents(&self) -> Vec<(Point, f64)> {
        let dim = self.dim;
        let merge = |mut a: Vec<(Point, f64)>, b: Vec<(Point, f64)>, add: bool| {
            for (p, e) in b {
                if let Some(q) = a.iter_mut().find(|(q, _)| distance(q, &p, dim) < 1e-12) {
                    q.1 = if add { q.1 + e } else { q.1.min(e) };
                } else {
                    a.push((p, e));
                }
            }
            a
        };
        match &*self.kind {
            Kind::PowerLaw { center, exponent } => vec![(*center, *exponent)],
            Kind::Smooth(f) => f.local_exponents(),
            Kind::Pointwise(a, b) => merge(a.local_exponents(), b.local_exponents(), true),
            Kind::SmoothProduct { factor, base } => {
                merge(base.local_exponents(), factor.local_exponents(), true)
            }
            Kind::Sum(terms) => terms.iter().fold(Vec::new(), |acc, (_, t)| {
                merge(acc, t.local_exponents(), false)
            }),
            _ => vec![],
        }
    }

    /// The kernel as a closed-form function, when it is one.
    pub fn as_closed_form(&self) -> Option<ClosedForm> {
        match &*self.kind {
            Kind::Smooth(f) => Some(f.clone()),
            Kind::PowerLaw { center, exponent } => Some(ClosedForm::cusp(*center, *exponent)),
            Kind::Pointwise(a, b) => Some(a.as_closed_form()?.times(b.as_closed_form()?)),
            Kind::SmoothProduct { factor, base } => {
                Some(factor.clone().times(base.as_closed_form()?))
            }
            Kind::Sum(terms) => {
                let mut out = Vec::with_capacity(terms.len());
                for (w, t) in terms {
                    out.push((*w, t.as_closed_form()?));
                }
                Some(ClosedForm::Sum(out))
            }
            _ => None,
        }
    }

    /// Partial derivatives of a function-type kernel at `y`.
    pub fn density_jet(&self, y: &Point, order: usize) -> Result<Jet> {
        let f = self.as_closed_form().ok_or_else(|| {
            Error::InvalidInput(format!("{} is not a pointwise function", self.label))
        })?;
        f.jet(y, self.dim, order)
    }

    /// `u(φ)`.
    pub fn pair(&self, phi: &TestFunction) -> Result<f64> {
        self.pair_vanishing(phi, 0)
    }

    /// `u(φ^λ_x)`.
    pub fn pair_scaled(&self, phi: &TestFunction, x: &Point, lambda: f64) -> Result<f64> {
        if let Kind::DiracDelta { center, derivative } = &*self.kind {
            self.check_dim(phi)?;
            let mut z = [0.0; 2];
            for i in 0..self.dim {
                z[i] = (center[i] - x[i]) / lambda;
            }
            let order = derivative[0] + derivative[1];
            let sign = if order % 2 == 1 { -1.0 } else { 1.0 };
            return Ok(sign
                * lambda.powi(-(self.dim as i32) - order as i32)
                * phi.partial(&z, *derivative)?);
        }
        self.pair(&phi.scale_translate(lambda, x))
    }

    fn check_dim(&self, phi: &TestFunction) -> Result<()> {
        if phi.dim() != self.dim {
            return Err(Error::DomainMismatch(format!(
                "kernel {} is {}-dimensional, test function is {}-dimensional",
                self.label,
                self.dim,
                phi.dim()
            )));
        }
        Ok(())
    }

    /// Pairing with a test function known to vanish to order `vanish - 1` at the
    /// singular points (`vanish = 0` means no assumption).
    pub(crate) fn pair_vanishing(&self, phi: &TestFunction, vanish: usize) -> Result<f64> {
        self.check_dim(phi)?;
        match &*self.kind {
            Kind::DiracDelta { center, derivative } => {
                let order = derivative[0] + derivative[1];
                let sign = if order % 2 == 1 { -1.0 } else { 1.0 };
                Ok(sign * phi.partial(center, *derivative)?)
            }
            Kind::LogDerivative { center } => log_pairing(phi, center[0], false),
            Kind::SignedLogDerivative { center } => log_pairing(phi, center[0], true),
            Kind::Grid(g) => g.pair(phi),
            Kind::Sum(terms) if !self.is_function() => {
                let mut acc = 0.0;
                for (w, t) in terms {
                    acc += w * t.pair_vanishing(phi, vanish)?;
                }
                Ok(acc)
            }
            Kind::SmoothProduct { factor, base } if !base.is_function() => {
                base.pair_vanishing(&phi.weighted(factor.clone()), vanish)
            }
            Kind::Renormalized {
                base,
                center,
                jets,
                coeffs,
            } => {
                let order = jets.iter().map(|(k, _)| k[0] + k[1] + 1).max().unwrap_or(0);
                let mut terms = vec![(1.0, phi.clone())];
                for (k, psi) in jets {
                    terms.push((-phi.partial(center, *k)?, psi.clone()));
                }
                let w = TestFunction::combination(terms);
                let mut acc = base.pair_vanishing(&w, order)?;
                for (k, a) in coeffs {
                    let sign = if (k[0] + k[1]) % 2 == 1 { -1.0 } else { 1.0 };
                    acc += a * sign * phi.partial(center, *k)?;
                }
                Ok(acc)
            }
            _ => self.integrate_density(phi, vanish),
        }
    }

    fn integrate_density(&self, phi: &TestFunction, vanish: usize) -> Result<f64> {
        let d = self.dim as f64;
        let sing: Vec<(Point, f64)> = self
            .local_exponents()
            .into_iter()
            .map(|(p, e)| (p, e + vanish as f64))
            .collect();
        for (p, e) in &sing {
            if *e <= -d && !phi.vanishes_near(p) {
                return Err(Error::NonIntegrableSingularity {
                    center: p[..self.dim].to_vec(),
                    exponent: *e - vanish as f64,
                });
            }
        }
        let g = |y: &Point| -> f64 {
            let v = phi.value(y);
            if v == 0.0 {
                0.0
            } else {
                v * self.density(y).unwrap_or(0.0)
            }
        };
        if self.dim == 1 {
            let (lo, hi) = phi.support_box();
            let mut cuts = phi.breakpoints(0);
            cuts.extend(sing.iter().map(|(p, _)| p[0]));
            Ok(integrate_1d(|t| g(&[t, 0.0]), lo[0], hi[0], cuts, &sing))
        } else {
            Ok(integrate_2d(&g, phi, &sing))
        }
    }
}

fn fmt_point(p: &Point, dim: usize) -> String {
    if dim == 1 {
        format!("{}", p[0])
    } else {
        format!("{},{}", p[0], p[1])
    }
}

/// Effective exponent for the endpoint substitution; none for integer powers,
/// which are smooth enough for plain adaptive quadrature.
fn substitution_exponent(e: f64) -> Option<f64> {
    if e >= 0.0 && e.fract() == 0.0 {
        None
    } else {
        Some(e.max(-0.999))
    }
}

/// `∫_a^b g` with the singular points split out; panels touching a singular
/// point of negative exponent are integrated with the endpoint substitution.
pub(crate) fn integrate_1d<G: Fn(f64) -> f64>(
    g: G,
    a: f64,
    b: f64,
    cuts: Vec<f64>,
    sing: &[(Point, f64)],
) -> f64 {
    let mut pts: Vec<f64> = cuts.into_iter().filter(|&c| c > a && c < b).collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let exponent_at = |x: f64| -> Option<f64> {
        sing.iter()
            .filter(|(p, _)| p[0] == x)
            .map(|(_, e)| *e)
            .fold(None, |acc: Option<f64>, e| {
                Some(acc.map_or(e, |a| a.min(e)))
            })
            .and_then(substitution_exponent)
    };
    let mut total = 0.0;
    for w in pts.windows(2) {
        let (l, r) = (w[0], w[1]);
        let el = exponent_at(l);
        let er = exponent_at(r);
        total += match (el, er) {
            (None, None) => integrate(&g, l, r, &[], opts()).value,
            (Some(e), None) => {
                integrate_power_endpoint(|t| g(l + t) * t.powf(-e), e, r - l, opts()).value
            }
            (None, Some(e)) => {
                integrate_power_endpoint(|t| g(r - t) * t.powf(-e), e, r - l, opts()).value
            }
            (Some(e1), Some(e2)) => {
                let m = 0.5 * (l + r);
                integrate_power_endpoint(|t| g(l + t) * t.powf(-e1), e1, m - l, opts()).value
                    + integrate_power_endpoint(|t| g(r - t) * t.powf(-e2), e2, r - m, opts()).value
            }
        };
    }
    total
}

fn integrate_2d<G: Fn(&Point) -> f64>(g: &G, phi: &TestFunction, sing: &[(Point, f64)]) -> f64 {
    let (lo, hi) = phi.support_box();
    // a singular point inside the support is handled in polar coordinates
    let inside = sing
        .iter()
        .find(|(p, e)| *e < 0.0 && (0..2).all(|i| p[i] > lo[i] - 1e-12 && p[i] < hi[i] + 1e-12));
    if let Some((c, e)) = inside {
        let reach = phi.support_reach(c);
        let radial_e = substitution_exponent(e + 1.0);
        let outer = |theta: f64| -> f64 {
            let (s, co) = theta.sin_cos();
            let f = |r: f64| g(&[c[0] + r * co, c[1] + r * s]) * r;
            match radial_e {
                Some(re) => {
                    integrate_power_endpoint(|t| f(t) * t.powf(-re), re, reach, inner_opts_2d())
                        .value
                }
                None => integrate(f, 0.0, reach, &[], inner_opts_2d()).value,
            }
        };
        let corners: Vec<f64> = (0..4).map(|k| k as f64 * PI / 2.0).collect();
        return integrate(outer, 0.0, 2.0 * PI, &corners, outer_opts_2d()).value;
    }
    let bx = phi.breakpoints(0);
    let by = phi.breakpoints(1);
    // well-separated singularities leave a smooth integrand: a fixed tensor rule suffices
    let width = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let separated = sing.iter().all(|(p, e)| {
        let dx = (p[0] - p[0].clamp(lo[0], hi[0])).abs();
        let dy = (p[1] - p[1].clamp(lo[1], hi[1])).abs();
        (*e >= 0.0 && e.fract() == 0.0) || dx.max(dy) >= 0.5 * width
    });
    if separated {
        return fixed_tensor_rule(g, lo, hi, &bx, &by);
    }
    let outer =
        |x: f64| -> f64 { integrate(|y| g(&[x, y]), lo[1], hi[1], &by, inner_opts_2d()).value };
    integrate(outer, lo[0], hi[0], &bx, outer_opts_2d()).value
}

/// Gauss–Legendre nodes per panel of the fixed 2D rule.
const FIXED_RULE_NODES: usize = 24;

fn fixed_panels(lo: f64, hi: f64, breaks: &[f64]) -> Vec<(f64, f64)> {
    let mut cuts = vec![lo, hi];
    cuts.extend(breaks.iter().copied().filter(|b| *b > lo && *b < hi));
    if cuts.len() == 2 {
        cuts.push(0.5 * (lo + hi));
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let (gx, gw) = crate::quad::gauss_legendre(FIXED_RULE_NODES);
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let (c, h) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
        out.extend(gx.iter().zip(&gw).map(|(x, wt)| (c + h * x, h * wt)));
    }
    out
}

fn fixed_tensor_rule<G: Fn(&Point) -> f64>(
    g: &G,
    lo: Point,
    hi: Point,
    bx: &[f64],
    by: &[f64],
) -> f64 {
    let nx = fixed_panels(lo[0], hi[0], bx);
    let ny = fixed_panels(lo[1], hi[1], by);
    nx.iter()
        .map(|(x, wx)| wx * ny.iter().map(|(y, wy)| wy * g(&[*x, *y])).sum::<f64>())
        .sum()
}

/// `-∫ w(y - c) φ'(y) dy` with `w = log|·|` or `sgn(·) log|·|`.
fn log_pairing(phi: &TestFunction, c: f64, signed: bool) -> Result<f64> {
    if phi.dim() != 1 {
        return Err(Error::DomainMismatch(
            "log-derivative kernels are one-dimensional".into(),
        ));
    }
    let (lo, hi) = phi.support_box();
    let g = |y: f64| -> f64 {
        let t = y - c;
        if t == 0.0 {
            return 0.0;
        }
        let d1 = phi.jet(&[y, 0.0], 1).map(|j| j.get([1, 0])).unwrap_or(0.0);
        let w = if signed {
            t.signum() * t.abs().ln()
        } else {
            t.abs().ln()
        };
        -w * d1
    };
    let mut cuts = phi.breakpoints(0);
    cuts.push(c);
    Ok(integrate_1d(g, lo[0], hi[0], cuts, &[([c, 0.0], -0.5)]))
}

/// `u(φ)`.
pub fn pair(u: &DistributionExpr, phi: &TestFunction) -> Result<f64> {
    u.pair(phi)
}

/// `u(φ^λ_x)` with `φ^λ_x(y) = λ^{-d} φ((y - x)/λ)`.
pub fn pair_scaled(
    u: &DistributionExpr,
    phi: &TestFunction,
    x: &Point,
    lambda: f64,
) -> Result<f64> {
    u.pair_scaled(phi, x, lambda)
}

/// `f · u` with `(f · u)(φ) = u(f φ)`.
pub fn multiply_by_smooth(u: &DistributionExpr, f: ClosedForm) -> Result<DistributionExpr> {
    // the factor must carry as many derivatives as the kernel consumes
    fn check(u: &DistributionExpr, f: &ClosedForm) -> Result<()> {
        match u.kind() {
            Kind::DiracDelta { center, derivative } => {
                let m = derivative[0] + derivative[1];
                f.jet(center, u.dim(), m)
                    .map(|_| ())
                    .map_err(|_| Error::InsufficientDerivatives {
                        needed: m,
                        available: (0..m)
                            .rev()
                            .find(|&k| f.jet(center, u.dim(), k).is_ok())
                            .unwrap_or(0),
                    })
            }
            Kind::LogDerivative { center } | Kind::SignedLogDerivative { center } => f
                .jet(center, 1, 1)
                .map(|_| ())
                .map_err(|_| Error::InsufficientDerivatives {
                    needed: 1,
                    available: 0,
                }),
            Kind::Sum(terms) => terms.iter().try_for_each(|(_, t)| check(t, f)),
            Kind::SmoothProduct { base, .. } => check(base, f),
            _ => Ok(()),
        }
    }
    check(u, &f)?;
    let ss = u
        .singsupp
        .clone()
        .union(SingularSupport::Points(f.singular_points()), u.dim);
    Ok(DistributionExpr::new(
        u.dim,
        Kind::SmoothProduct {
            factor: f,
            base: u.clone(),
        },
        ss,
        format!("smooth*{}", u.label),
    ))
}

/// Test functions sampled for property checks: all partials at a point up to `order`.
pub fn partials_at(phi: &TestFunction, p: &Point, order: usize) -> Result<Vec<(MultiIndex, f64)>> {
    let j = phi.jet(p, order)?;
    Ok(multi_indices(phi.dim(), order)
        .into_iter()
        .map(|k| (k, j.get(k)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testfn::make_bump;

    #[test]
    fn delta_and_derivative() {
        let phi = make_bump(1, 1.0, 2).scale_translate(1.0, &[0.2, 0.0]);
        let d = DistributionExpr::delta(1, [0.0, 0.0]);
        assert_eq!(d.pair(&phi).unwrap(), phi.value(&[0.0, 0.0]));
        let d1 = DistributionExpr::delta_derivative(1, [0.1, 0.0], [1, 0]);
        let expect = -phi.partial(&[0.1, 0.0], [1, 0]).unwrap();
        assert_eq!(d1.pair(&phi).unwrap(), expect);
    }

    #[test]
    fn power_law_rejects_nonintegrable() {
        let u = DistributionExpr::power_law(1, [0.0, 0.0], -1.0);
        let phi = make_bump(1, 1.0, 2);
        assert!(matches!(
            u.pair(&phi),
            Err(Error::NonIntegrableSingularity { .. })
        ));
        let away = make_bump(1, 0.25, 2).scale_translate(1.0, &[0.5, 0.0]);
        assert!(u.pair(&away).is_ok());
    }

    #[test]
    fn power_law_homogeneity() {
        let u = DistributionExpr::power_law(1, [0.0, 0.0], -0.5);
        let phi = make_bump(1, 1.0, 2);
        let base = u.pair(&phi).unwrap();
        for n in [2, 6, 10] {
            let lam = 2f64.powi(-n);
            let v = u.pair_scaled(&phi, &[0.0, 0.0], lam).unwrap();
            assert!((v / base - lam.powf(-0.5)).abs() < 1e-9 * lam.powf(-0.5));
        }
    }

    #[test]
    fn smooth_product_with_delta_derivative() {
        let f = ClosedForm::Polynomial {
            center: 0.0,
            coeffs: vec![2.0, 3.0],
        };
        let u = multiply_by_smooth(
            &DistributionExpr::delta_derivative(1, [0.0, 0.0], [1, 0]),
            f,
        )
        .unwrap();
        let phi = make_bump(1, 1.0, 2).scale_translate(1.0, &[0.3, 0.0]);
        let j = phi.jet(&[0.0, 0.0], 1).unwrap();
        // -(fφ)'(0) = -(3 φ(0) + 2 φ'(0))
        let expect = -(3.0 * j.get([0, 0]) + 2.0 * j.get([1, 0]));
        assert!((u.pair(&phi).unwrap() - expect).abs() < 1e-14);
        let cusp = ClosedForm::cusp([0.0, 0.0], 0.5);
        assert!(matches!(
            multiply_by_smooth(
                &DistributionExpr::delta_derivative(1, [0.0, 0.0], [1, 0]),
                cusp
            ),
            Err(Error::InsufficientDerivatives { .. })
        ));
    }

    #[test]
    fn grid_field_checks_domain() {
        let field = GridField::new(1, [8, 1], [-1.0, 0.0], 0.25, vec![1.0; 8]).unwrap();
        let u = DistributionExpr::grid(field, SingularSupport::Points(vec![]));
        let phi = make_bump(1, 1.0, 2).scale_translate(1.0, &[0.5, 0.0]);
        assert!(matches!(u.pair(&phi), Err(Error::DomainMismatch(_))));
        assert!(GridField::new(1, [6, 1], [-1.0, 0.0], 0.25, vec![1.0; 6]).is_err());
    }

    #[test]
    fn two_dimensional_power_law_scales() {
        let u = DistributionExpr::power_law(2, [0.0, 0.0], -1.0);
        let phi = make_bump(2, 1.0, 2);
        let a = u.pair(&phi).unwrap();
        let b = u.pair_scaled(&phi, &[0.0, 0.0], 0.25).unwrap();
        assert!((b / a - 4.0).abs() < 1e-8, "{}", b / a);
    }
}
