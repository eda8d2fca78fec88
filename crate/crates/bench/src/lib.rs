//! Benchmark fixtures shared by the criterion targets.

use expd::graph::Graph;

/// Attach uniform lengths summing to one, the shape LP duals take on
/// symmetric instances.
pub fn with_uniform_lengths(g: Graph) -> Graph {
    let m = g.edge_count();
    g.with_lengths(vec![1.0 / m as f64; m]).unwrap()
}
