//! Fleischer-style multiplicative-weights approximation of the concurrent
//! flow LP. Each phase routes every commodity's full demand along shortest
//! path trees under the current edge weights, bumping weights
//! multiplicatively as flow lands on edges. The normalized weights are a
//! feasible dual, so the primal/dual gap certifies accuracy; the solve stops
//! as soon as the gap is within `1 + epsilon`.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::metric::shortest_path_tree;
use crate::weighting::NodeWeighting;

use super::{
    check_demand_connected, check_output, demand_weighted_distance, product_commodities,
    repair_conservation, trivial_output, DualLengths, FlowCertificate,
};

pub fn solve_mwu(
    g: &Graph,
    a: &NodeWeighting,
    epsilon: f64,
) -> Result<(FlowCertificate, DualLengths)> {
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(Error::Domain(format!(
            "mwu epsilon must be in (0, 1/2], got {epsilon}"
        )));
    }
    if a.total() == 0 {
        return Err(Error::Domain("solve_mwu needs |A| > 0".into()));
    }
    check_demand_connected(g, a)?;
    let commodities = product_commodities(a)?;
    if commodities.is_empty() {
        return Ok(trivial_output(g));
    }

    let n = g.vertex_count();
    let m = g.edge_count();
    let eta = epsilon / 3.0;
    let step_cap =
        (10.0 * m as f64 * (m.max(2) as f64).ln() / (epsilon * epsilon)).ceil() as usize;

    let mut weights = vec![1.0 / m as f64; m];
    let mut flows: Vec<Vec<f64>> = vec![vec![0.0; 2 * m]; commodities.len()];
    let mut steps = 0usize;
    let mut phases = 0usize;
    let mut best_lb = 0.0f64;
    let mut best_lengths = normalized(&weights);

    loop {
        for (c, com) in commodities.iter().enumerate() {
            let mut remaining: Vec<f64> = com.sinks.iter().map(|&(_, d)| d).collect();
            loop {
                let (dist, parent) = shortest_path_tree(g, &weights, com.source);
                // Aggregate the outstanding demand down the tree: the load
                // on v's parent arc is the demand of v's whole subtree.
                let mut down = vec![0.0f64; n];
                for (i, &(v, _)) in com.sinks.iter().enumerate() {
                    down[v] += remaining[i];
                }
                let mut order: Vec<usize> = (0..n).filter(|&v| dist[v].is_finite()).collect();
                order.sort_by(|&x, &y| {
                    dist[y]
                        .partial_cmp(&dist[x])
                        .unwrap()
                        .then_with(|| x.cmp(&y))
                });
                let mut max_load = 0.0f64;
                for &v in &order {
                    if let Some((p, _)) = parent[v] {
                        down[p] += down[v];
                        max_load = max_load.max(down[v]);
                    }
                }
                if max_load <= 0.0 {
                    break;
                }
                // Scale the push so no edge takes more than unit capacity in
                // one step (the weight update assumes loads <= 1).
                let sigma = (1.0 / max_load).min(1.0);
                for &v in &order {
                    if down[v] > 0.0 {
                        if let Some((p, e)) = parent[v] {
                            let amount = sigma * down[v];
                            let (eu, _) = g.endpoints(e);
                            let arc = if eu == p { 2 * e } else { 2 * e + 1 };
                            flows[c][arc] += amount;
                            weights[e] *= 1.0 + eta * amount;
                        }
                    }
                }
                for r in remaining.iter_mut() {
                    *r *= 1.0 - sigma;
                }
                steps += 1;
                if steps >= step_cap {
                    let best = finish(g, a, &commodities, flows, phases.max(1), best_lengths)?;
                    return Err(Error::SolverNoConvergence {
                        detail: format!(
                            "step cap {step_cap} reached after {phases} phases \
                             (kappa {} vs lower bound {best_lb})",
                            best.0.kappa
                        ),
                        best: Box::new(best),
                    });
                }
                if sigma >= 1.0 {
                    break;
                }
            }
        }
        phases += 1;

        let kappa_ub = max_edge_load(&flows, m) / phases as f64;
        let lengths = normalized(&weights);
        let obj = demand_weighted_distance(g, a, &lengths)?;
        if obj > best_lb {
            best_lb = obj;
            best_lengths = lengths;
        }
        if kappa_ub <= (1.0 + epsilon) * best_lb {
            let mut out = finish(g, a, &commodities, flows, phases, best_lengths)?;
            out.0.epsilon = epsilon;
            check_output(g, &out.0, &out.1)?;
            return Ok(out);
        }
        // Weights only grow; rescale before they overflow.
        let total: f64 = weights.iter().sum();
        if total > 1e100 {
            for w in &mut weights {
                *w /= total;
            }
        }
    }
}

fn normalized(weights: &[f64]) -> Vec<f64> {
    let s: f64 = weights.iter().sum();
    let scale = if s > 0.0 { (1.0 - 1e-12) / s } else { 0.0 };
    weights.iter().map(|w| w * scale).collect()
}

fn max_edge_load(flows: &[Vec<f64>], m: usize) -> f64 {
    (0..m)
        .map(|e| flows.iter().map(|f| f[2 * e] + f[2 * e + 1]).sum::<f64>())
        .fold(0.0, f64::max)
}

fn finish(
    g: &Graph,
    a: &NodeWeighting,
    commodities: &[super::Commodity],
    mut flows: Vec<Vec<f64>>,
    phases: usize,
    lengths: Vec<f64>,
) -> Result<(FlowCertificate, DualLengths)> {
    let scale = 1.0 / phases as f64;
    for f in &mut flows {
        for x in f.iter_mut() {
            *x *= scale;
        }
    }
    repair_conservation(g, commodities, &mut flows);
    let cert = FlowCertificate {
        kappa: 0.0,
        epsilon: 0.0,
        commodities: commodities.to_vec(),
        flows,
    };
    let kappa = cert.max_load(g.edge_count());
    let objective = demand_weighted_distance(g, a, &lengths)?;
    Ok((
        FlowCertificate { kappa, ..cert },
        DualLengths { lengths, objective },
    ))
}
