//! Repository-level clone auditing for agent-tool ecosystems.
//!
//! The pipeline ingests a manifest of checked-out repositories
//! ([`corpus`]), reduces each to a normalized text stream ([`normalize`]),
//! scores repository pairs with token-set Jaccard and CTPH ([`metrics`],
//! [`pairwise`]), then buckets, clusters and calibrates the scores against
//! human labels ([`analysis`], [`verify`]).

pub mod analysis;
pub mod corpus;
pub mod metadata;
pub mod metrics;
pub mod normalize;
pub mod pairwise;
pub mod run;
pub mod scalar;
pub mod verify;

pub use scalar::Scalar;

/// Similarity score in double precision, the type used on disk.
pub type Score = metrics::SimilarityScore<f64>;

/// Wilson interval in double precision.
pub type Interval = analysis::WilsonInterval<f64>;
