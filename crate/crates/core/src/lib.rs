//! Exact max-cut and maximum triangle-free subgraph laboratory.

pub mod bounds;
pub mod cut;
pub mod extremal;
pub mod graph;
pub mod harness;
pub mod lattice;
pub mod randgen;

pub use graph::{CliqueList, Edge, EdgeSet, Graph, GraphError, Vertex, VertexSet};
