//! Skeleton dimension of weighted graphs, randomized hub labelings built
//! from it, and D-preserving distance labels.

pub mod dpres;
pub mod error;
pub mod generators;
pub mod graph;
pub mod grid;
pub mod hub;
pub mod packing;
pub mod rho;
pub mod skeleton;
pub mod spt;

pub use error::{Error, Result};
pub use graph::{Edge, EdgeId, Graph, Metric, NodeId};
