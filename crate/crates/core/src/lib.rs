//! Near-optimal flow-expander decompositions of undirected graphs.
//!
//! The headline entry point is [`decomp::ed_multi`]: given a graph, an
//! integral node-weighting and an expansion parameter `phi`, it removes a
//! small edge set `C` so that the weighting restricted to every connected
//! component of `G - C` is flow-expanding at `phi/2` (degrading gracefully
//! when the approximate solver is selected). Everything the recursion
//! asserts is re-checkable after the fact: [`verify`] holds the independent
//! oracles (exact LP expansion checks, brute-force cut enumeration, the
//! two-hop routing bound, and the end-to-end cut-size accounting).

pub mod baseline;
pub mod cover;
pub mod decomp;
pub mod error;
pub mod flow;
pub mod generators;
pub mod graph;
pub mod io;
pub mod metric;
pub mod sweep;
pub mod verify;
pub mod weighting;

pub use error::{Error, Result};
pub use graph::{Cut, EdgeId, Graph, VertexId};
pub use weighting::NodeWeighting;
