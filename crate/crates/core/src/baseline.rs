//! Classical cut-and-recurse baseline: solve the flow LP, and while the
//! demand does not route, take the best single-source distance-threshold
//! cut of the dual metric and recurse on both sides. Used for benchmark
//! comparison against the scale-voting decomposition.

use crate::error::Result;
use crate::flow::{routability_gate, Routability, SolverSelect};
use crate::graph::{EdgeId, Graph, VertexId};
use crate::metric::distances_with;
use crate::weighting::NodeWeighting;

#[derive(Clone, Debug)]
pub struct BaselineResult {
    pub removed: Vec<EdgeId>,
    pub components: Vec<Vec<VertexId>>,
    pub max_depth: usize,
}

pub fn cut_and_recurse(
    g: &Graph,
    a: &NodeWeighting,
    phi: f64,
    solver: SolverSelect,
) -> Result<BaselineResult> {
    let ids: Vec<VertexId> = (0..g.vertex_count()).collect();
    let edge_ids: Vec<EdgeId> = (0..g.edge_count()).collect();
    let mut max_depth = 0;
    let mut removed = split(g, a, phi, solver, &ids, &edge_ids, 0, &mut max_depth)?;
    removed.sort_unstable();
    removed.dedup();
    Ok(BaselineResult {
        components: g.components(&removed),
        removed,
        max_depth,
    })
}

#[allow(clippy::too_many_arguments)]
fn split(
    g: &Graph,
    a: &NodeWeighting,
    phi: f64,
    solver: SolverSelect,
    vertex_to_root: &[VertexId],
    edge_to_root: &[EdgeId],
    depth: usize,
    max_depth: &mut usize,
) -> Result<Vec<EdgeId>> {
    *max_depth = (*max_depth).max(depth);
    let comps = g.components(&[]);
    if comps.len() > 1 {
        let mut removed = Vec::new();
        for comp in comps {
            let (sub, map) = g.induced(&comp);
            let sub_a = a.reindex(&map.vertex_to_parent);
            let sub_v: Vec<VertexId> = map
                .vertex_to_parent
                .iter()
                .map(|&p| vertex_to_root[p])
                .collect();
            let sub_e: Vec<EdgeId> = map
                .edge_to_parent
                .iter()
                .map(|&p| edge_to_root[p])
                .collect();
            removed.extend(split(
                &sub, &sub_a, phi, solver, &sub_v, &sub_e, depth, max_depth,
            )?);
        }
        return Ok(removed);
    }

    if a.total() <= 1 || a.support_size() <= 1 || g.vertex_count() <= 1 || g.edge_count() == 0 {
        return Ok(Vec::new());
    }
    let dual = match routability_gate(g, a, phi, solver.resolve(g.vertex_count()))? {
        Routability::Expanding(_) => return Ok(Vec::new()),
        Routability::NotExpanding(dual) => dual,
    };

    let side = match best_sweep(g, a, &dual.lengths) {
        Some(side) => side,
        None => return Ok(Vec::new()),
    };
    let mut removed: Vec<EdgeId> = g.boundary(&side).iter().map(|&e| edge_to_root[e]).collect();
    let mask = g.membership(&side);
    let complement: Vec<VertexId> = (0..g.vertex_count()).filter(|&v| !mask[v]).collect();
    for part in [&side, &complement] {
        let (sub, map) = g.induced(part);
        let sub_a = a.reindex(&map.vertex_to_parent);
        let sub_v: Vec<VertexId> = map
            .vertex_to_parent
            .iter()
            .map(|&p| vertex_to_root[p])
            .collect();
        let sub_e: Vec<EdgeId> = map
            .edge_to_parent
            .iter()
            .map(|&p| edge_to_root[p])
            .collect();
        removed.extend(split(
            &sub,
            &sub_a,
            phi,
            solver,
            &sub_v,
            &sub_e,
            depth + 1,
            max_depth,
        )?);
    }
    Ok(removed)
}

/// Best ascending distance-threshold cut over all support sources: the
/// classical rounding of the spreading metric. Returns the side of the
/// sparsest prefix with mass on both sides, or None when no prefix
/// separates the support.
fn best_sweep(g: &Graph, a: &NodeWeighting, lengths: &[f64]) -> Option<Vec<VertexId>> {
    let n = g.vertex_count();
    let total = a.total();
    let mut best: Option<(f64, VertexId, Vec<VertexId>)> = None;
    for &s in &a.support() {
        let dist = distances_with(g, lengths, &[s]);
        let mut order: Vec<VertexId> = (0..n).collect();
        order.sort_by(|&x, &y| dist[x].partial_cmp(&dist[y]).unwrap().then_with(|| x.cmp(&y)));
        let mut in_prefix = vec![false; n];
        let mut cut = 0usize;
        let mut mass = 0u64;
        let mut best_k: Option<(f64, usize)> = None;
        for k in 1..n {
            let v = order[k - 1];
            in_prefix[v] = true;
            for &(w, _) in g.neighbors(v) {
                if in_prefix[w] {
                    cut -= 1;
                } else {
                    cut += 1;
                }
            }
            mass += a.mass(v);
            let min_mass = mass.min(total - mass);
            if min_mass == 0 {
                continue;
            }
            let ratio = cut as f64 / min_mass as f64;
            if best_k.is_none_or(|(r, _)| ratio < r) {
                best_k = Some((ratio, k));
            }
        }
        if let Some((ratio, k)) = best_k {
            if best.as_ref().is_none_or(|&(r, ..)| ratio < r) {
                let mut side = order[..k].to_vec();
                side.sort_unstable();
                best = Some((ratio, s, side));
            }
        }
    }
    best.map(|(_, _, side)| side)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    #[test]
    fn agrees_with_gate_on_expanding_instances() {
        let g = Graph::new(2, vec![(0, 1)]).unwrap();
        let a = NodeWeighting::uniform(2, 1);
        let r = cut_and_recurse(&g, &a, 1.0, SolverSelect::Exact).unwrap();
        assert!(r.removed.is_empty());
    }

    #[test]
    fn dumbbell_baseline_cuts_the_bridge() {
        let g = generators::dumbbell(3).unwrap();
        let a = NodeWeighting::degrees(&g);
        let r = cut_and_recurse(&g, &a, 1.0, SolverSelect::Exact).unwrap();
        assert!(!r.removed.is_empty());
        // both triangles should survive as components
        assert!(r.components.iter().all(|c| c.len() <= 3));
    }

    #[test]
    fn components_pass_the_gate_afterwards() {
        let g = generators::hypercube(3).unwrap();
        let a = NodeWeighting::degrees(&g);
        let r = cut_and_recurse(&g, &a, 2.0, SolverSelect::Exact).unwrap();
        for comp in &r.components {
            let (sub, map) = g.induced(comp);
            let sub_a = a.reindex(&map.vertex_to_parent);
            if sub_a.support_size() <= 1 {
                continue;
            }
            match routability_gate(&sub, &sub_a, 2.0, SolverSelect::Exact).unwrap() {
                Routability::Expanding(_) => {}
                Routability::NotExpanding(_) => panic!("component not expanding"),
            }
        }
    }
}
