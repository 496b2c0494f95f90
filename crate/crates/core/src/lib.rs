//! Exact learning-unlearning schemes for realizability testing.
//!
//! The crate covers hypothesis classes given explicitly or through a
//! realizability oracle, exact dimension searches, version-space compression
//! with mergeable encodings, central and ticketed unlearning schemes with
//! bit-exact memory accounting, exact halfspace separability, and lower-bound
//! instances paired with adversaries that recover a hidden secret from a
//! scheme's answers.

pub mod adversary;
pub mod compression;
pub mod cost;
pub mod dimensions;
pub mod geometry;
pub mod hypset;
pub mod instances;
pub mod io;
pub mod model;
pub mod report;
pub mod schemes;

mod error;

pub use error::{Error, Result};
pub use model::{
    erm_lexmin, is_realizable, remove, version_space, ClassHandle, Dataset, FiniteClass, Item,
    LabeledPair, Query, RealizabilityOracle, VersionSpace,
};
