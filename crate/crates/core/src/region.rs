//! Points and compact regions in one or two dimensions.

use serde::{Deserialize, Serialize};

/// A point in `R^d`; for `d = 1` the second coordinate is ignored and kept at zero.
pub type Point = [f64; 2];

pub fn point1(x: f64) -> Point {
    [x, 0.0]
}

pub fn distance(a: &Point, b: &Point, dim: usize) -> f64 {
    (0..dim).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>().sqrt()
}

/// Compact sets used by the estimators. All regions are sub-boxes of the
/// working domain, possibly enlarged or punctured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Box {
        dim: usize,
        lower: Point,
        upper: Point,
    },
    /// Points within `radius` of the base region.
    Enlarged {
        base: Box<Region>,
        radius: f64,
    },
    Punctured {
        base: Box<Region>,
        removed: Point,
    },
}

impl Region {
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Region {
        let mut lower = [0.0; 2];
        let mut upper = [0.0; 2];
        for i in 0..dim {
            lower[i] = lo;
            upper[i] = hi;
        }
        Region::Box { dim, lower, upper }
    }

    /// Cube of half-width `r` around `c`.
    pub fn around(dim: usize, c: &Point, r: f64) -> Region {
        let mut lower = [0.0; 2];
        let mut upper = [0.0; 2];
        for i in 0..dim {
            lower[i] = c[i] - r;
            upper[i] = c[i] + r;
        }
        Region::Box { dim, lower, upper }
    }

    /// The fixed working domain `[-1, 1)^d`.
    pub fn domain(dim: usize) -> Region {
        Region::cube(dim, -1.0, 1.0)
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Box { dim, .. } => *dim,
            Region::Enlarged { base, .. } | Region::Punctured { base, .. } => base.dim(),
        }
    }

    pub fn enlargement(&self, r: f64) -> Region {
        Region::Enlarged {
            base: Box::new(self.clone()),
            radius: r,
        }
    }

    pub fn punctured(&self, p: Point) -> Region {
        Region::Punctured {
            base: Box::new(self.clone()),
            removed: p,
        }
    }

    /// Euclidean distance from `p` to the region (zero inside).
    pub fn distance_to(&self, p: &Point) -> f64 {
        match self {
            Region::Box { dim, lower, upper } => (0..*dim)
                .map(|i| {
                    let d = (lower[i] - p[i]).max(p[i] - upper[i]).max(0.0);
                    d * d
                })
                .sum::<f64>()
                .sqrt(),
            Region::Enlarged { base, radius } => (base.distance_to(p) - radius).max(0.0),
            Region::Punctured { base, .. } => base.distance_to(p),
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        match self {
            Region::Box { .. } => self.distance_to(p) == 0.0,
            Region::Enlarged { base, radius } => base.distance_to(p) <= *radius,
            Region::Punctured { base, removed } => {
                base.contains(p) && distance(p, removed, base.dim()) > 0.0
            }
        }
    }

    /// Smallest axis-aligned box containing the region.
    pub fn bounding_box(&self) -> (Point, Point) {
        match self {
            Region::Box { lower, upper, .. } => (*lower, *upper),
            Region::Enlarged { base, radius } => {
                let (mut lo, mut hi) = base.bounding_box();
                for i in 0..base.dim() {
                    lo[i] -= radius;
                    hi[i] += radius;
                }
                (lo, hi)
            }
            Region::Punctured { base, .. } => base.bounding_box(),
        }
    }

    /// `n` equispaced samples per axis over the bounding box, kept if inside.
    pub fn grid_samples(&self, n: usize) -> Vec<Point> {
        let (lo, hi) = self.bounding_box();
        let axis = |i: usize| -> Vec<f64> {
            if n == 1 {
                return vec![0.5 * (lo[i] + hi[i])];
            }
            (0..n)
                .map(|k| lo[i] + (hi[i] - lo[i]) * k as f64 / (n - 1) as f64)
                .collect()
        };
        let mut out = Vec::new();
        if self.dim() == 1 {
            for x in axis(0) {
                out.push([x, 0.0]);
            }
        } else {
            let (xs, ys) = (axis(0), axis(1));
            for &x in &xs {
                for &y in &ys {
                    out.push([x, y]);
                }
            }
        }
        out.retain(|p| self.contains(p));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enlargement_is_distance_neighbourhood() {
        let k = Region::cube(2, -0.5, 0.5);
        let k1 = k.enlargement(1.0);
        assert!(k1.contains(&[1.5, 0.0]));
        assert!(!k1.contains(&[1.5001, 0.0]));
        // corner: distance sqrt(2)*0.7 ≈ 0.99 from the corner (0.5, 0.5)
        assert!(k1.contains(&[1.2, 1.2]));
        assert!(!k1.contains(&[1.3, 1.3]));
        assert_eq!(k1.bounding_box(), ([-1.5, -1.5], [1.5, 1.5]));
    }

    #[test]
    fn punctured_excludes_point() {
        let k = Region::cube(1, -1.0, 1.0).punctured([0.0, 0.0]);
        assert!(!k.contains(&[0.0, 0.0]));
        assert!(k.contains(&[0.1, 0.0]));
    }

    #[test]
    fn grid_samples_include_center_for_odd_counts() {
        let s = Region::cube(1, -1.0, 1.0).grid_samples(33);
        assert_eq!(s.len(), 33);
        assert!(s.iter().any(|p| p[0] == 0.0));
    }
}
