//! Shapley-value node centrality for s-t connectivity, with classical engines
//! and state-vector simulations of the span-program connectivity test,
//! gamma-weighted quantum Shapley estimation and quantum maximum finding.

pub mod bench;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod linalg;
pub mod qmax;
pub mod qshapley;
pub mod qsim;
pub mod report;
pub mod rng;
pub mod shapley;
pub mod span;

pub use error::{Error, Result};
pub use graph::{AdjacencyString, Coalition, EdgeIndexMap, Graph, NodeId};
pub use shapley::{Game, Method, ShapleyEstimate};
