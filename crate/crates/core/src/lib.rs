//! Regularity estimates, microlocal product criteria, extensions across
//! point singularities and coherent product germs for distributions on
//! `R^d`, `d ∈ {1, 2}`.
//!
//! Distributions are symbolic ([`DistributionExpr`]) and are probed through
//! pairings with scaled test functions `φ^λ_x(y) = λ^{-d} φ((y - x)/λ)`.

pub mod catalog;
pub mod closed_form;
pub mod config;
pub mod dyadic;
pub mod error;
pub mod extension;
pub mod fit;
pub mod germs;
pub mod grid;
pub mod jet;
pub mod kernels;
pub mod product;
pub mod quad;
pub mod region;
pub mod regularity;
pub mod scan;
pub mod suite;
pub mod testfn;
pub mod wavefront;

pub use catalog::{parse_kernel, parse_test_function, standard_catalog};
pub use closed_form::ClosedForm;
pub use config::RunConfig;
pub use dyadic::{
    besov_norm, build_partition, local_besov_norm, lp_block, BesovNorm, DyadicPartition,
};
pub use error::{Error, Result};
pub use extension::{
    extend, multiply_and_extend, scaling_degree, ExtensionFamily, ScalingDegreeEstimate,
};
pub use germs::{
    check_coherence, product_germ, reconstruct_product_germ, verify_reconstruction_bound,
    CoherenceReport, Germ, ReconstructionReport,
};
pub use jet::MultiIndex;
pub use kernels::{multiply_by_smooth, pair, pair_scaled, DistributionExpr, SingularSupport};
pub use product::{
    check_young_classical, check_young_microlocal, verify_continuity_bound, young_product,
    Decision, ProductAdmissibility,
};
pub use region::{Point, Region};
pub use regularity::{
    estimate_beta_star, estimate_holder_exponent, estimate_local_sobolev, RegularityReport,
    ReportKind,
};
pub use scan::ScaleRange;
pub use testfn::{cr_norm, make_bump, make_moment_free, TestFunction};
pub use wavefront::{
    critical_sobolev_direction, pairwise_product_criterion, wavefront_set, wavefront_sets,
    ConeSpec, WavefrontReport,
};
