//! Knowledge-based feature generation.
//!
//! Given a small labeled training set and one or more auxiliary datasets that
//! share some of its features, the engine learns predictors for the features
//! that exist only in the auxiliary data and injects the useful ones into the
//! training set as new columns.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, configuration
//! files, threading and the command-line driver live in the `featgen` crate.
//!
//! Layout:
//! - [`tabular`]: typed datasets and column manipulation.
//! - [`learners`]: decision tree, random forest, k-NN and a linear classifier,
//!   stratified cross-validation and information-theoretic scoring.
//! - [`matching`]: correspondence between training and auxiliary features.
//! - [`generation`]: single- and multi-auxiliary feature generation.
//! - [`evaluation`]: FGT construction, the reduced-sample testing protocol
//!   and paired significance tests.
#![no_std]

extern crate alloc;

mod error;
pub mod evaluation;
pub mod exec;
pub mod generation;
pub mod learners;
pub mod matching;
pub mod rng;
pub mod tabular;

pub use error::{Error, Result};
pub use exec::{Executor, Sequential};
pub use tabular::{Dataset, Feature, FeatureKind, Label, Value};
