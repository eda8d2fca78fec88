//! Property tests for the structural invariants of the graph layer and the
//! product demand.

use proptest::prelude::*;

use expd::graph::Graph;
use expd::metric::{ball, distances};
use expd::weighting::NodeWeighting;

/// A connected random graph plus a length per edge, as raw data.
fn graph_strategy() -> impl Strategy<Value = (usize, Vec<(usize, usize)>, Vec<u32>)> {
    (2usize..24).prop_flat_map(|n| {
        let tree = proptest::collection::vec(0usize..usize::MAX, n - 1);
        let extra = proptest::collection::vec((0usize..n, 0usize..n), 0..12);
        (Just(n), tree, extra).prop_flat_map(|(n, tree, extra)| {
            let mut edges: Vec<(usize, usize)> = tree
                .iter()
                .enumerate()
                .map(|(i, &r)| (r % (i + 1), i + 1))
                .collect();
            edges.extend(extra.into_iter().filter(|&(u, v)| u != v));
            let m = edges.len();
            (
                Just(n),
                Just(edges),
                proptest::collection::vec(0u32..1000, m),
            )
        })
    })
}

fn build(n: usize, edges: &[(usize, usize)], lengths: &[u32]) -> Graph {
    Graph::new(n, edges.to_vec())
        .unwrap()
        .with_lengths(lengths.iter().map(|&l| l as f64 / 1000.0).collect())
        .unwrap()
}

proptest! {
    #[test]
    fn boundary_is_symmetric((n, edges, lengths) in graph_strategy(), side_bits in any::<u64>()) {
        let g = build(n, &edges, &lengths);
        let side: Vec<usize> = (0..n).filter(|&v| side_bits >> (v % 64) & 1 == 1).collect();
        let complement: Vec<usize> = (0..n).filter(|v| !side.contains(v)).collect();
        prop_assert_eq!(g.boundary(&side).len(), g.boundary(&complement).len());
    }

    #[test]
    fn components_partition_the_vertices((n, edges, lengths) in graph_strategy(), removed_bits in any::<u64>()) {
        let g = build(n, &edges, &lengths);
        let removed: Vec<usize> = (0..g.edge_count())
            .filter(|&e| removed_bits >> (e % 64) & 1 == 1)
            .collect();
        let comps = g.components(&removed);
        let mut all: Vec<usize> = comps.iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        // connected graph, nothing removed: one component
        prop_assert_eq!(g.components(&[]).len(), 1);
    }

    #[test]
    fn ball_is_monotone_in_radius((n, edges, lengths) in graph_strategy(), r1 in 0.0f64..2.0, r2 in 0.0f64..2.0) {
        let g = build(n, &edges, &lengths);
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let small = ball(&g, 0, lo).unwrap();
        let big = ball(&g, 0, hi).unwrap();
        prop_assert!(small.iter().all(|v| big.contains(v)));
        prop_assert!(small.contains(&0));
    }

    #[test]
    fn ball_matches_distances((n, edges, lengths) in graph_strategy(), radius in 0.0f64..2.0) {
        let g = build(n, &edges, &lengths);
        let b = ball(&g, 0, radius).unwrap();
        let dist = distances(&g, 0).unwrap();
        for (v, &d) in dist.iter().enumerate() {
            let inside = d <= radius;
            let near_boundary = (d - radius).abs() <= 1e-6 * radius.max(1.0);
            prop_assert!(b.contains(&v) == inside || near_boundary);
        }
    }

    #[test]
    fn product_demand_respects_the_weighting(masses in proptest::collection::vec(0u64..50, 2..20)) {
        prop_assume!(masses.iter().sum::<u64>() > 0);
        let a = NodeWeighting::new(masses.clone());
        let n = masses.len();
        for u in 0..n {
            let row: f64 = (0..n)
                .filter(|&v| v != u)
                .map(|v| a.product_demand(u, v).unwrap())
                .sum();
            prop_assert!(row <= a.mass(u) as f64 + 1e-9);
        }
    }

    #[test]
    fn induced_subgraph_preserves_interior_edges((n, edges, lengths) in graph_strategy(), keep_bits in any::<u64>()) {
        let g = build(n, &edges, &lengths);
        let keep: Vec<usize> = (0..n).filter(|&v| keep_bits >> (v % 64) & 1 == 1).collect();
        let (sub, map) = g.induced(&keep);
        prop_assert_eq!(sub.vertex_count(), keep.len());
        let interior = g
            .edges()
            .iter()
            .filter(|&&(u, v)| keep.contains(&u) && keep.contains(&v))
            .count();
        prop_assert_eq!(sub.edge_count(), interior);
        for (e, &pe) in map.edge_to_parent.iter().enumerate() {
            let (su, sv) = sub.endpoints(e);
            let (pu, pv) = g.endpoints(pe);
            prop_assert_eq!(
                (map.vertex_to_parent[su], map.vertex_to_parent[sv]),
                (pu, pv)
            );
        }
    }
}
