use thiserror::Error;

/// Errors raised by pairings, estimators and decision procedures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("power-law singularity of exponent {exponent} at {center:?} is not integrable against this test function")]
    NonIntegrableSingularity { center: Vec<f64>, exponent: f64 },
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("insufficient derivatives: need order {needed}, have {available}")]
    InsufficientDerivatives { needed: usize, available: usize },
    #[error("insufficient resolution: only {usable} usable scales (need at least {required})")]
    InsufficientResolution { usable: usize, required: usize },
    #[error("band too narrow: j_max = {j_max} needs frequency 2^{needed} but the grid resolves up to {nyquist:.1}")]
    BandTooNarrow {
        j_max: usize,
        needed: usize,
        nyquist: f64,
    },
    #[error("aliasing: {0}")]
    Aliasing(String),
    #[error("product roles undetermined: {0}")]
    RolesUndetermined(String),
    #[error("not admissible: {0}")]
    NotAdmissible(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("singular supports meet in {0} points; localize before extending")]
    MultiplePoints(usize),
    #[error("no extension exists: {0}")]
    NoExtension(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
