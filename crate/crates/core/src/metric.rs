//! Shortest paths in the edge-length metric: single/multi-source Dijkstra,
//! metric balls, and set diameters.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::Result;
use crate::graph::{approx_le, EdgeId, Graph, VertexId};

#[derive(Copy, Clone, PartialEq)]
struct HeapItem {
    dist: f64,
    vertex: VertexId,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, vertex id as tie-break for determinism
        other
            .dist
            .partial_cmp(&self.dist)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Distances from the nearest of `sources` under the graph's edge lengths.
/// Unreachable vertices get `f64::INFINITY`. Length-0 edges are fine.
pub fn distances_from(g: &Graph, sources: &[VertexId]) -> Result<Vec<f64>> {
    let lengths = g.require_lengths()?;
    Ok(distances_with(g, lengths, sources))
}

pub fn distances(g: &Graph, source: VertexId) -> Result<Vec<f64>> {
    distances_from(g, &[source])
}

/// Same as [`distances_from`] but with an explicit length function, so
/// solvers can probe candidate metrics without rebuilding the graph.
pub fn distances_with(g: &Graph, lengths: &[f64], sources: &[VertexId]) -> Vec<f64> {
    debug_assert_eq!(lengths.len(), g.edge_count());
    let mut dist = vec![f64::INFINITY; g.vertex_count()];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        if dist[s] > 0.0 {
            dist[s] = 0.0;
            heap.push(HeapItem { dist: 0.0, vertex: s });
        }
    }
    while let Some(HeapItem { dist: d, vertex: v }) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(w, e) in g.neighbors(v) {
            let nd = d + lengths[e];
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(HeapItem { dist: nd, vertex: w });
            }
        }
    }
    dist
}

/// Shortest-path tree from `source`: distances plus, per vertex, the
/// `(parent, edge)` pair it was reached through. Relaxation is strict, so
/// the tree is deterministic given the adjacency order.
pub fn shortest_path_tree(
    g: &Graph,
    lengths: &[f64],
    source: VertexId,
) -> (Vec<f64>, Vec<Option<(VertexId, EdgeId)>>) {
    let mut dist = vec![f64::INFINITY; g.vertex_count()];
    let mut parent: Vec<Option<(VertexId, EdgeId)>> = vec![None; g.vertex_count()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(HeapItem { dist: 0.0, vertex: source });
    while let Some(HeapItem { dist: d, vertex: v }) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(w, e) in g.neighbors(v) {
            let nd = d + lengths[e];
            if nd < dist[w] {
                dist[w] = nd;
                parent[w] = Some((v, e));
                heap.push(HeapItem { dist: nd, vertex: w });
            }
        }
    }
    (dist, parent)
}

/// `B(center, radius)` in the length metric, ascending vertex ids. The
/// center is always included; membership uses the crate-wide relative
/// tolerance, so LP output noise does not flip verdicts.
pub fn ball(g: &Graph, center: VertexId, radius: f64) -> Result<Vec<VertexId>> {
    debug_assert!(radius >= 0.0);
    let dist = distances(g, center)?;
    Ok(ball_of_distances(&dist, radius))
}

pub fn ball_of_distances(dist: &[f64], radius: f64) -> Vec<VertexId> {
    (0..dist.len())
        .filter(|&v| dist[v].is_finite() && approx_le(dist[v], radius))
        .collect()
}

/// Strong diameter of `set` measured in the full graph metric:
/// `max_{u,v in set} dist(u, v)`.
pub fn set_diameter(g: &Graph, set: &[VertexId]) -> Result<f64> {
    let mut diam: f64 = 0.0;
    for &u in set {
        let dist = distances(g, u)?;
        for &v in set {
            if dist[v].is_finite() {
                diam = diam.max(dist[v]);
            } else {
                diam = f64::INFINITY;
            }
        }
    }
    Ok(diam)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    #[test]
    fn zero_radius_ball_keeps_center_and_zero_length_neighbors() {
        let g = Graph::new(3, vec![(0, 1), (1, 2)])
            .unwrap()
            .with_lengths(vec![0.0, 0.5])
            .unwrap();
        assert_eq!(ball(&g, 0, 0.0).unwrap(), vec![0, 1]);
    }

    #[test]
    fn ball_on_path_reaches_by_distance() {
        // path a-b-c with l = 0.3 each: ball(a, 0.3) = {a, b}
        let g = Graph::new(3, vec![(0, 1), (1, 2)])
            .unwrap()
            .with_lengths(vec![0.3, 0.3])
            .unwrap();
        assert_eq!(ball(&g, 0, 0.3).unwrap(), vec![0, 1]);
    }

    #[test]
    fn ball_on_cycle_uses_shortest_side() {
        // 4-cycle with l = 0.25 per edge: ball(v, 0.25) = v and both neighbors.
        // Hand shortest-path table from v0: d(1) = d(3) = 0.25, d(2) = 0.5.
        let g = Graph::new(4, vec![(0, 1), (1, 2), (2, 3), (3, 0)])
            .unwrap()
            .with_lengths(vec![0.25; 4])
            .unwrap();
        assert_eq!(ball(&g, 0, 0.25).unwrap(), vec![0, 1, 3]);
    }

    #[test]
    fn ball_requires_lengths() {
        let g = Graph::new(2, vec![(0, 1)]).unwrap();
        assert!(ball(&g, 0, 1.0).is_err());
    }

    #[test]
    fn set_diameter_on_path() {
        let g = Graph::new(3, vec![(0, 1), (1, 2)])
            .unwrap()
            .with_lengths(vec![0.3, 0.4])
            .unwrap();
        assert_eq!(set_diameter(&g, &[0, 2]).unwrap(), 0.7);
        assert_eq!(set_diameter(&g, &[1]).unwrap(), 0.0);
    }
}
