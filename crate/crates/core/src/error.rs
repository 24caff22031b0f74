use thiserror::Error;

/// Errors raised by truncated-series arithmetic.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TaylorError {
    #[error("division by near-zero constant term ({0:e})")]
    DivisionNearZero(f64),
    #[error("{func}: argument {value} outside domain")]
    DomainError { func: &'static str, value: f64 },
    #[error("operands have different truncation orders ({0} vs {1})")]
    OrderMismatch(usize, usize),
    #[error("truncation order {0} outside supported range")]
    OrderOutOfRange(usize),
    #[error("derivative ({a},{b}) exceeds jet order {order}")]
    OrderExceeded { a: usize, b: usize, order: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Taylor(#[from] TaylorError),
    #[error(transparent)]
    Parse(#[from] crate::dsl::ParseError),
    #[error("point ({u}, {v}) outside chart domain")]
    PointOutsideDomain { u: f64, v: f64 },
    #[error("finite-difference stencil leaves the chart domain")]
    StencilOutsideDomain,
    #[error("first-order part is rank deficient (not an immersion)")]
    DegenerateImmersion,
    #[error("umbilic point: traceless second fundamental form below threshold")]
    UmbilicPoint,
    #[error("minimal point: |H| below threshold")]
    MinimalPoint,
    #[error("surface of centers degenerates (dg has rank < 2)")]
    DegenerateCenters,
    #[error("degenerate frame: {0}")]
    DegenerateFrame(&'static str),
    #[error("Lambda component of H below threshold")]
    LambdaRankError,
    #[error("Moebius pole hit")]
    PoleHit,
    #[error("ambient dimension mismatch (expected {expected}, got {got})")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("projected coordinate not zero (|last| = {0:e})")]
    ProjectionNotFlat(f64),
    #[error("Weierstrass data not isotropic (defect {0:e})")]
    NonIsotropicData(f64),
    #[error("no closed-form antiderivative for the given Weierstrass data")]
    NonClosedFormAntiderivative,
    #[error("insufficient usable samples ({usable} of {total})")]
    InsufficientSamples { usable: usize, total: usize },
    #[error("degenerate coverage: {excluded} of {total} grid points excluded")]
    DegenerateCoverage { excluded: usize, total: usize },
    #[error("certification failed for `{id}`: {flag}")]
    CertificationFailed { id: String, flag: String },
    #[error("unknown gallery id `{0}`")]
    UnknownId(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
