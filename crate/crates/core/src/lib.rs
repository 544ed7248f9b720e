//! Exact-arithmetic calculus for surface bundles and Lefschetz fibrations
//! over surfaces, driven by homological monodromy data.
//!
//! The crate computes total-space invariants (Euler characteristic, Betti
//! numbers, first homology with torsion, signature) of fibered 4-manifolds
//! described either by explicit monodromy factorizations or by declared
//! literature invariants, builds the elementary stabilization blocks and
//! their fiber/section sums, and emits machine-checkable certificates of
//! non-complexity and homotopy distinction.
//!
//! All arithmetic is exact (arbitrary-precision integers and rationals);
//! no floating point appears anywhere.

pub mod certify;
pub mod construct;
pub mod error;
pub mod fibration;
pub mod invariants;
pub mod linalg;
pub mod meyer;
pub mod monodromy;
pub mod seeds;

pub use error::{CertifyError, ConstructError, FibrationError, LinalgError, MonodromyError};
