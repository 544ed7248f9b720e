//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("primitivity is undefined for the zero vector")]
    ZeroVector,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MonodromyError {
    #[error("curve class has genus {expected} but letter lives on genus {found}")]
    GenusMismatch { expected: usize, found: usize },
    #[error("non-separating curve class must be primitive: {0}")]
    NotPrimitive(String),
    #[error("separating flag inconsistent with class vector: {0}")]
    SeparatingFlag(String),
    #[error("curve class vector has length {found}, expected {expected}")]
    ClassLength { expected: usize, found: usize },
    #[error("matrix is not symplectic for genus {0}")]
    NotSymplectic(usize),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FibrationError {
    #[error("fiber genus must be at least 1")]
    FiberGenusZero,
    #[error("a Lefschetz fibration requires a non-empty critical locus")]
    EmptyCriticalLocus,
    #[error("a bundle must not carry vanishing cycles (found {0})")]
    BundleWithCycles(usize),
    #[error("vanishing cycle {index} has power {power}, expected 1")]
    CyclePower { index: usize, power: i64 },
    #[error("factorization has {found} handles but base genus is {expected}")]
    HandleCount { expected: usize, found: usize },
    #[error("homological monodromy relation fails: {0}")]
    RelationFails(String),
    #[error(transparent)]
    Monodromy(#[from] MonodromyError),
    #[error("declared invariants are contradictory: {0}")]
    ContradictoryDeclaration(String),
    #[error("declared signature is missing (template entry): {0}")]
    MissingSignature(String),
    #[error("operation requires an explicit monodromy factorization")]
    OpaqueBody,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructError {
    #[error("block family {family} requires g + h >= 3 (got g={g}, h={h})")]
    GenusSum { family: char, g: usize, h: usize },
    #[error("block curves must be distinct primitive classes: {0}")]
    BadCurves(String),
    #[error("R-block over a genus-1 base requires <a,b> = 0 (got {0})")]
    NonOrthogonalPair(String),
    #[error("no suitable curve: {0}")]
    NoSuitableCurve(String),
    #[error("fiber genus mismatch: {0} vs {1}")]
    FiberGenusMismatch(usize, usize),
    #[error("base genus mismatch: {0} vs {1}")]
    BaseGenusMismatch(usize, usize),
    #[error("fiber is not known to be primitive in H_2 (no section and no override)")]
    FiberNotPrimitive,
    #[error("section sum requires a section of self-intersection zero on both sides")]
    MissingSection,
    #[error("twist matrix must be symplectic of matching genus")]
    BadTwist,
    #[error("dual-route homology cross-check failed (internal error): {0}")]
    CrossCheckFailed(String),
    #[error("stabilization precondition: {0}")]
    Precondition(String),
    #[error(transparent)]
    Fibration(#[from] FibrationError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CertifyError {
    #[error("family mode bounds violated: {0}")]
    ModeBounds(String),
    #[error("seed is missing required declared data: {0}")]
    IncompleteSeed(String),
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error(transparent)]
    Fibration(#[from] FibrationError),
}
