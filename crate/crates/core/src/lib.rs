//! Correlation clustering on complete signed graphs: standard and
//! Sherali-Adams relaxations, pivot rounding with correlated rounding of
//! medium `+` edges, derandomization with ratio certificates, and numeric
//! checks of the triangle-ratio analysis.

pub mod analysis;
pub mod correlated;
pub mod derandomize;
pub mod error;
pub mod instance;
pub mod lp;
pub mod partitions;
pub mod relaxations;
pub mod rounding;

pub use error::{Error, Result};
pub use instance::{
    clustering_cost, make_star_gap, random_instance, Clustering, Sign, SignedGraph,
};
pub use relaxations::{
    Distances, EdgeClass, Fractional, LocalDistribution, PartitionKey, SaValuation,
};
pub use derandomize::{derandomized_cluster, RoundingCertificate};
pub use rounding::{RoundingPolicy, Variant};
