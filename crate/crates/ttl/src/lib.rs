//! Exact invariants of tamely ramified extensions of local fields.
//!
//! The crate computes, with no floating point anywhere, the double cosets of
//! a tame Galois group, the signs attached to finite symplectic modules, the
//! rectifier character of an admissible character and the χ-data that
//! factor it, together with the transfer-factor and normalization constants
//! that go with them.
//!
//! The layers build on each other:
//!
//! * [`cyclo`] holds roots of unity ([`cyclo::Rot`]), signs and Gauss sums,
//! * [`galois`] models the Galois group and its double cosets,
//! * [`jumps`] holds the tower of fields and jumps of a character,
//! * [`symplectic`] computes occupancy and t-factors,
//! * [`rectifier`] assembles the rectifier along the canonical chain,
//! * [`chi`] assigns χ-data and multiplies them back together,
//! * [`transfer`] and [`norm`] evaluate transfer factors and constants,
//! * [`cli`] is the `ttl` command-line front end.

pub mod chi;
pub mod cli;
pub mod cyclo;
pub mod galois;
pub mod jumps;
pub mod norm;
pub mod rectifier;
pub mod suites;
pub mod symplectic;
pub mod transfer;

pub use cyclo::{Rot, Sign};
pub use galois::{CosetKind, DoubleCoset, ExtShape, Subfield};
pub use jumps::JumpDatum;

