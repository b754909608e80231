//! Brute-force reference implementations for checking `specbench` in tests.
//!
//! Only the data types of `specbench` (graphs, peaks) are used here; none of its
//! scoring, fingerprinting or canonicalization code. [`random`] builds seeded
//! valid inputs through the public constructors.

use thiserror::Error;

pub mod features;
pub mod fixtures;
pub mod isomorphism;
pub mod matching;
pub mod random;
pub mod sequences;

pub use features::{raw_feature_sets, set_tanimoto, FeatureKind, MAX_FEATURE_ATOMS};
pub use fixtures::FIXTURE_SMILES;
pub use isomorphism::isomorphic;
pub use matching::{exhaustive_match, Criterion, Matching, OraclePair, MAX_PEAKS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance too large for exhaustive search: {size} > {limit}")]
    TooLarge { size: usize, limit: usize },
}

/// A reference value together with a note on how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult<T> {
    pub value: T,
    pub method: &'static str,
}
