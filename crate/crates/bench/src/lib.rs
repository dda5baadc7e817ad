//! Shared inputs for the criterion benches under `benches/`.

use microyoung::{parse_kernel, DistributionExpr, Region};

/// Representative 1D kernels: a point mass, a negative power law and a cusp.
pub fn kernels_1d() -> Vec<DistributionExpr> {
    ["delta@0", "powerlaw@0:-0.5", "cusp@0:0.6"]
        .iter()
        .map(|id| parse_kernel(id, 1).expect("catalog id"))
        .collect()
}

pub fn unit_region(dim: usize) -> Region {
    Region::cube(dim, -0.5, 0.5)
}
