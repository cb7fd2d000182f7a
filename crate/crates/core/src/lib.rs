//! Bounded-degree digraphs, pattern decomposition, occurrence-freeness of
//! integer sequences, and the reduction between them.

pub mod config;
pub mod embed;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod occurrence;
pub mod oracle;
pub mod pattern;
pub mod reduction;
pub mod seed;
pub mod testers;

pub use error::{Error, Result};
pub use graph::{BoundedDigraph, Vertex};
pub use oracle::{NeighborOracle, OracleSession, QueryModel};
pub use pattern::{decompose_pattern, PatternDecomposition, SourceSplit};
