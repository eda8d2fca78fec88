//! Independent oracles over finished decompositions: exact-LP expansion
//! certification per component, brute-force cut enumeration, the two-hop
//! routing bound that reduces arbitrary demands to the product demand, and
//! a replay of the cut-size accounting from the audit trail.

use serde::Serialize;

use crate::decomp::{compute_scales, CaseTag, Constants, Decomposition};
use crate::error::{Error, Result};
use crate::flow::solve_exact;
use crate::graph::{Graph, VertexId};
use crate::weighting::NodeWeighting;

/// Components above this size are reported "unverified" rather than run
/// through the exact LP.
pub const EXACT_CHECK_MAX_N: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Too large for the exact checker; never a silent pass.
    Unverified,
}

/// Expansion certificate for one component.
#[derive(Clone, Debug, Serialize)]
pub struct ExpansionReport {
    pub component: Vec<VertexId>,
    /// Exact congestion of the product demand within the component.
    pub kappa_product: Option<f64>,
    /// Largest certified flow-expansion constant, `1/(2 kappa)`.
    pub flow_expanding_at: Option<f64>,
    /// Exact cut-expansion constant (brute force; small components only).
    pub cut_expanding_at: Option<f64>,
    /// Whether the component certifies `(phi/2)`-flow-expansion, i.e.
    /// `kappa <= 1/phi`.
    pub verdict: Verdict,
}

/// Solve the exact LP on a connected component and certify flow expansion
/// at `phi/2` via the product-demand reduction.
pub fn check_flow_expansion(g: &Graph, a: &NodeWeighting, phi: f64) -> Result<ExpansionReport> {
    if phi <= 0.0 {
        return Err(Error::Domain(format!("phi must be positive, got {phi}")));
    }
    let component: Vec<VertexId> = (0..g.vertex_count()).collect();
    if g.vertex_count() > EXACT_CHECK_MAX_N {
        return Ok(ExpansionReport {
            component,
            kappa_product: None,
            flow_expanding_at: None,
            cut_expanding_at: None,
            verdict: Verdict::Unverified,
        });
    }
    let (cert, _) = solve_exact(g, a)?;
    let kappa = cert.kappa;
    let expanding_at = if kappa > 0.0 {
        1.0 / (2.0 * kappa)
    } else {
        f64::INFINITY
    };
    // Cheap enough to enumerate on small components; flow expansion can
    // never exceed cut expansion.
    let cut_expanding_at = if g.vertex_count() <= 12 {
        let c = brute_force_cut_expansion(g, a)?;
        if expanding_at > c + 1e-9 {
            return Err(Error::invariant(
                "flow-cut-sandwich",
                format!("flow expansion {expanding_at} exceeds cut expansion {c}"),
                "check_flow_expansion",
            ));
        }
        Some(c)
    } else {
        None
    };
    let verdict = if kappa <= (1.0 + 1e-6) / phi {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(ExpansionReport {
        component,
        kappa_product: Some(kappa),
        flow_expanding_at: Some(expanding_at),
        cut_expanding_at,
        verdict,
    })
}

/// Exact cut-expansion constant by enumerating all nontrivial sides.
/// Sides with zero mass on the light side do not constrain expansion and
/// are skipped.
pub fn brute_force_cut_expansion(g: &Graph, a: &NodeWeighting) -> Result<f64> {
    let n = g.vertex_count();
    if n > 20 {
        return Err(Error::Size(format!(
            "brute force enumerates 2^n cuts; n = {n} > 20"
        )));
    }
    if n < 2 {
        return Ok(f64::INFINITY);
    }
    let total = a.total();
    let mut best = f64::INFINITY;
    // Fix vertex n-1 outside the side to halve the enumeration.
    for bits in 1u64..(1u64 << (n - 1)) {
        let side_mass: u64 = (0..n - 1)
            .filter(|&v| bits >> v & 1 == 1)
            .map(|v| a.mass(v))
            .sum();
        let min_mass = side_mass.min(total - side_mass);
        if min_mass == 0 {
            continue;
        }
        let cut = g
            .edges()
            .iter()
            .filter(|&&(u, v)| {
                let in_u = u < n - 1 && bits >> u & 1 == 1;
                let in_v = v < n - 1 && bits >> v & 1 == 1;
                in_u != in_v
            })
            .count();
        best = best.min(cut as f64 / min_mass as f64);
    }
    Ok(best)
}

/// Fractional two-hop routing of an `A`-respecting demand in the complete
/// demand-graph whose capacities are the product demand: pair `{x,y}`
/// spreads over intermediates `z` in proportion to `A(z)`.
#[derive(Clone, Debug)]
pub struct TwoHopRouting {
    /// Load per unordered vertex pair, row-major upper triangle.
    pub loads: Vec<((VertexId, VertexId), f64)>,
    /// `max load / capacity` over pairs with positive capacity.
    pub max_congestion: f64,
}

pub fn two_hop_route(
    a: &NodeWeighting,
    demand: &[((VertexId, VertexId), f64)],
) -> Result<TwoHopRouting> {
    let n = a.len();
    let total = a.total();
    if total == 0 {
        return Err(Error::Domain("two_hop_route needs |A| > 0".into()));
    }
    // The reduction only covers A-respecting demands.
    let mut row = vec![0.0f64; n];
    for &((x, y), d) in demand {
        if x == y || d < 0.0 {
            return Err(Error::contract(
                "demand-shape",
                format!("bad demand entry ({x},{y}) = {d}"),
            ));
        }
        row[x] += d;
        row[y] += d;
    }
    for (x, &sum) in row.iter().enumerate() {
        if sum > a.mass(x) as f64 * (1.0 + 1e-12) {
            return Err(Error::contract(
                "demand-respects-weighting",
                format!("row sum {sum} at vertex {x} exceeds A(x) = {}", a.mass(x)),
            ));
        }
    }

    let mut load = vec![0.0f64; n * n];
    let idx = |u: usize, v: usize| u.min(v) * n + u.max(v);
    for &((x, y), d) in demand {
        if d == 0.0 {
            continue;
        }
        for z in 0..n {
            let share = d * a.mass(z) as f64 / total as f64;
            if share == 0.0 {
                continue;
            }
            if z != x {
                load[idx(x, z)] += share;
            }
            if z != y {
                load[idx(z, y)] += share;
            }
        }
    }

    let mut loads = Vec::new();
    let mut max_congestion = 0.0f64;
    for u in 0..n {
        for v in (u + 1)..n {
            let l = load[idx(u, v)];
            if l == 0.0 {
                continue;
            }
            let cap = a.product_demand(u, v)?;
            if cap == 0.0 {
                return Err(Error::invariant(
                    "two-hop-support",
                    format!("flow {l} on zero-capacity pair ({u},{v})"),
                    "two_hop_route",
                ));
            }
            max_congestion = max_congestion.max(l / cap);
            loads.push(((u, v), l));
        }
    }
    if max_congestion > 2.0 + 1e-9 {
        return Err(Error::invariant(
            "two-hop-congestion",
            format!("load/capacity ratio {max_congestion} exceeds 2"),
            "two_hop_route",
        ));
    }
    Ok(TwoHopRouting {
        loads,
        max_congestion,
    })
}

/// Replay of the cut-size accounting from the audit trail.
#[derive(Clone, Debug, Serialize)]
pub struct OverheadReport {
    pub removed_edges: usize,
    pub total_mass: u64,
    pub phi: f64,
    /// `c1 * 8^L * L^2 * gamma^2` at the top-level mass.
    pub beta_budget: Option<f64>,
    /// `|C| / (phi |A| log2 |A|)`.
    pub realized_beta: Option<f64>,
    pub overhead_ratio: Option<f64>,
    pub heavy_nodes: usize,
    pub balanced_nodes: usize,
    pub max_depth: usize,
}

/// Recompute per-level contributions from the audit tree and check the
/// heavy-branch and balanced-branch inequalities plus the telescoped total.
pub fn audit_overhead(
    g: &Graph,
    d: &Decomposition,
    constants: &Constants,
) -> Result<OverheadReport> {
    let phi = d.effective_phi;
    let nodes = &d.audit.nodes;
    if nodes.is_empty() {
        return Err(Error::Domain("decomposition carries no audit tree".into()));
    }
    let total = nodes[0].total_mass;

    // Every removed edge is attributed to exactly one node.
    let mut from_nodes: Vec<usize> = nodes.iter().flat_map(|n| n.cut_here.iter().copied()).collect();
    from_nodes.sort_unstable();
    let mut sorted_removed = d.removed.clone();
    sorted_removed.sort_unstable();
    if from_nodes != sorted_removed {
        return Err(Error::invariant(
            "audit-integrity",
            format!(
                "audit nodes attribute {} edges, decomposition removed {}",
                from_nodes.len(),
                sorted_removed.len()
            ),
            "audit_overhead",
        ));
    }

    let mut heavy_nodes = 0;
    let mut balanced_nodes = 0;
    for node in nodes {
        match node.case {
            CaseTag::Heavy => {
                heavy_nodes += 1;
                let h = node.heavy.as_ref().ok_or_else(|| {
                    Error::invariant("audit-integrity", "heavy node without audit".to_string(), "audit_overhead")
                })?;
                // Recompute the cut from the graph to catch tampering. The
                // node's subgraph is the induced graph on its vertex set,
                // so the sweep boundary is counted within that set only.
                let in_node = g.membership(&node.vertex_to_root);
                let in_side = g.membership(&nodes[node.children[0]].vertex_to_root);
                let recut = g
                    .edges()
                    .iter()
                    .filter(|&&(u, v)| {
                        in_node[u] && in_node[v] && (in_side[u] != in_side[v])
                    })
                    .count();
                let boundary_here = node.cut_here.len();
                if recut != boundary_here {
                    return Err(Error::invariant(
                        "audit-integrity",
                        format!("heavy node {}: recomputed cut {recut} != recorded {boundary_here}", node.id),
                        "audit_overhead",
                    ));
                }
                let charge = 12.0 * phi * h.side_mass.min(h.other_mass) as f64;
                if boundary_here as f64 > charge * (1.0 + 1e-9) {
                    return Err(Error::invariant(
                        "heavy-charge",
                        format!("node {}: cut {boundary_here} > {charge}", node.id),
                        "audit_overhead",
                    ));
                }
            }
            CaseTag::Balanced => {
                balanced_nodes += 1;
                let b = node.balanced.as_ref().ok_or_else(|| {
                    Error::invariant("audit-integrity", "balanced node without audit".to_string(), "audit_overhead")
                })?;
                let sp = compute_scales(node.total_mass, phi)?;
                let (_, j_star) = b.winner;
                let bound = constants.c0
                    * phi
                    * 8f64.powi(sp.levels as i32)
                    * sp.gamma
                    * sp.gamma
                    * node.total_mass as f64
                    * sp.log_mass_ratio(j_star as isize - 2);
                if b.boundary_total as f64 > bound * (1.0 + 1e-9) {
                    return Err(Error::invariant(
                        "balanced-cut-bound",
                        format!("node {}: boundary {} > {bound}", node.id, b.boundary_total),
                        "audit_overhead",
                    ));
                }
                if (b.covered_mass as u128) * (sp.levels as u128).pow(2) < node.total_mass as u128 {
                    return Err(Error::invariant(
                        "cover-progress",
                        format!("node {}: covered {} < |A|/L^2", node.id, b.covered_mass),
                        "audit_overhead",
                    ));
                }
            }
            _ => {}
        }
    }

    let (beta_budget, realized_beta, overhead_ratio) = if total >= 2 {
        let sp = compute_scales(total, phi)?;
        let beta = constants.c1
            * 8f64.powi(sp.levels as i32)
            * (sp.levels * sp.levels) as f64
            * sp.gamma
            * sp.gamma;
        let denom = phi * total as f64 * (total as f64).log2();
        let realized = d.removed.len() as f64 / denom;
        if realized > beta {
            return Err(Error::invariant(
                "cut-budget",
                format!("realized beta {realized} exceeds budget {beta}"),
                "audit_overhead",
            ));
        }
        (Some(beta), Some(realized), Some(realized))
    } else {
        if !d.removed.is_empty() {
            return Err(Error::invariant(
                "cut-budget",
                "removed edges with |A| <= 1".to_string(),
                "audit_overhead",
            ));
        }
        (None, None, None)
    };

    Ok(OverheadReport {
        removed_edges: d.removed.len(),
        total_mass: total,
        phi,
        beta_budget,
        realized_beta,
        overhead_ratio,
        heavy_nodes,
        balanced_nodes,
        max_depth: d.audit.max_depth(),
    })
}

/// Full post-hoc verification: expansion per component plus the overhead
/// replay.
#[derive(Clone, Debug, Serialize)]
pub struct DecompositionReport {
    pub phi: f64,
    pub component_reports: Vec<ExpansionReport>,
    pub passes: usize,
    pub failures: usize,
    pub unverified: usize,
    pub overhead: OverheadReport,
}

impl DecompositionReport {
    pub fn all_verified(&self) -> bool {
        self.failures == 0 && self.unverified == 0
    }
}

/// Check every component of `G - C` for `(phi/2)`-flow-expansion with the
/// exact LP (up to the size limit) and replay the accounting. The expansion
/// threshold `2/phi` leaves room for the MWU gate's `(1+epsilon)` slack.
pub fn verify_decomposition(
    g: &Graph,
    a: &NodeWeighting,
    d: &Decomposition,
    constants: &Constants,
) -> Result<DecompositionReport> {
    let phi = d.effective_phi;
    // Components must match the removed set.
    let recomputed = g.components(&d.removed);
    if recomputed != d.components {
        return Err(Error::invariant(
            "component-integrity",
            "stored components do not match G - C".to_string(),
            "verify_decomposition",
        ));
    }
    let mut component_reports = Vec::new();
    let (mut passes, mut failures, mut unverified) = (0, 0, 0);
    for comp in &d.components {
        let (sub, map) = g.induced(comp);
        let sub_a = a.reindex(&map.vertex_to_parent);
        let mut report = if sub_a.total() == 0 || sub_a.support_size() <= 1 {
            // no demand: vacuously expanding
            ExpansionReport {
                component: comp.clone(),
                kappa_product: Some(0.0),
                flow_expanding_at: Some(f64::INFINITY),
                cut_expanding_at: None,
                verdict: Verdict::Pass,
            }
        } else {
            // Components passed the gate at kappa < 1/phi when solved
            // exactly; the MWU gate only certifies (1+eps)/phi, so accept
            // up to 2/phi here.
            let mut r = check_flow_expansion(&sub, &sub_a, phi)?;
            if r.verdict == Verdict::Fail {
                if let Some(kappa) = r.kappa_product {
                    if kappa <= 2.0 / phi + 1e-6 {
                        r.verdict = Verdict::Pass;
                    }
                }
            }
            r
        };
        report.component = comp.clone();
        match report.verdict {
            Verdict::Pass => passes += 1,
            Verdict::Fail => failures += 1,
            Verdict::Unverified => unverified += 1,
        }
        component_reports.push(report);
    }
    let overhead = audit_overhead(g, d, constants)?;
    Ok(DecompositionReport {
        phi,
        component_reports,
        passes,
        failures,
        unverified,
        overhead,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::{ed, EdConfig};
    use crate::generators;

    #[test]
    fn k2_flow_expansion_report() {
        let g = Graph::new(2, vec![(0, 1)]).unwrap();
        let a = NodeWeighting::uniform(2, 1);
        let r = check_flow_expansion(&g, &a, 1.0).unwrap();
        assert!((r.kappa_product.unwrap() - 0.5).abs() < 1e-7);
        assert!((r.flow_expanding_at.unwrap() - 1.0).abs() < 1e-6);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn single_vertex_is_vacuously_expanding() {
        let g = Graph::new(1, vec![]).unwrap();
        let a = NodeWeighting::new(vec![3]);
        let r = check_flow_expansion(&g, &a, 100.0).unwrap();
        assert_eq!(r.kappa_product, Some(0.0));
        assert_eq!(r.flow_expanding_at, Some(f64::INFINITY));
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn path3_expansion_constants() {
        // kappa = 2/3, so flow expansion certifies at 3/4; brute force says
        // the true cut expansion is 1.
        let g = Graph::new(3, vec![(0, 1), (1, 2)]).unwrap();
        let a = NodeWeighting::uniform(3, 1);
        let r = check_flow_expansion(&g, &a, 1.0).unwrap();
        assert!((r.flow_expanding_at.unwrap() - 0.75).abs() < 1e-6);
        let cut = brute_force_cut_expansion(&g, &a).unwrap();
        assert!((cut - 1.0).abs() < 1e-12);
        assert!(r.flow_expanding_at.unwrap() <= cut + 1e-9);
    }

    #[test]
    fn brute_force_on_k2_and_cycle() {
        let k2 = Graph::new(2, vec![(0, 1)]).unwrap();
        assert_eq!(
            brute_force_cut_expansion(&k2, &NodeWeighting::uniform(2, 1)).unwrap(),
            1.0
        );
        let c4 = generators::hypercube(2).unwrap();
        assert_eq!(
            brute_force_cut_expansion(&c4, &NodeWeighting::uniform(4, 1)).unwrap(),
            1.0
        );
    }

    #[test]
    fn brute_force_skips_zero_mass_sides() {
        let g = Graph::new(3, vec![(0, 1), (1, 2)]).unwrap();
        let a = NodeWeighting::new(vec![0, 1, 1]);
        // the {0} side has zero mass and must not produce a 0/0 ratio
        let c = brute_force_cut_expansion(&g, &a).unwrap();
        assert!((c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn brute_force_rejects_large_instances() {
        let g = generators::grid(5, 5).unwrap();
        let a = NodeWeighting::uniform(25, 1);
        assert!(matches!(
            brute_force_cut_expansion(&g, &a),
            Err(Error::Size(_))
        ));
    }

    #[test]
    fn two_hop_self_routing_stays_under_two() {
        // D' = D_A itself
        let a = NodeWeighting::new(vec![1, 1, 2]);
        let mut demand = Vec::new();
        for u in 0..3 {
            for v in (u + 1)..3 {
                demand.push(((u, v), a.product_demand(u, v).unwrap()));
            }
        }
        let r = two_hop_route(&a, &demand).unwrap();
        assert!(r.max_congestion <= 2.0 + 1e-9);
    }

    #[test]
    fn two_hop_zero_demand_zero_loads() {
        let a = NodeWeighting::new(vec![1, 1]);
        let r = two_hop_route(&a, &[]).unwrap();
        assert!(r.loads.is_empty());
        assert_eq!(r.max_congestion, 0.0);
    }

    #[test]
    fn two_hop_single_pair_example() {
        // A = (1,1,2), D'(0,1) = 1 (respects A): the appendix formula puts
        // 1 * A(2)/|A| = 1/2 on each of (0,2) and (2,1), plus the direct
        // shares through z = 0, 1.
        let a = NodeWeighting::new(vec![1, 1, 2]);
        let r = two_hop_route(&a, &[((0, 1), 1.0)]).unwrap();
        let load02 = r
            .loads
            .iter()
            .find(|(p, _)| *p == (0, 2))
            .map(|&(_, l)| l)
            .unwrap();
        assert!((load02 - 0.5).abs() < 1e-12);
        // capacity D_A(0,2) = 2/4 = 1/2, so that pair is at ratio exactly 1
        assert!(r.max_congestion <= 2.0 + 1e-9);
    }

    #[test]
    fn two_hop_rejects_disrespectful_demand() {
        let a = NodeWeighting::new(vec![1, 1]);
        let err = two_hop_route(&a, &[((0, 1), 5.0)]).unwrap_err();
        assert!(matches!(err, Error::Contract { .. }));
    }

    #[test]
    fn empty_cut_audits_to_zero_ratio() {
        let g = Graph::new(2, vec![(0, 1)]).unwrap();
        let a = NodeWeighting::uniform(2, 1);
        let d = ed(&g, &a, 1.0, &EdConfig::default()).unwrap();
        let report = audit_overhead(&g, &d, &Constants::default()).unwrap();
        assert_eq!(report.removed_edges, 0);
        assert_eq!(report.overhead_ratio, Some(0.0));
    }

    #[test]
    fn q3_round_trip_verifies() {
        let g = generators::hypercube(3).unwrap();
        let a = NodeWeighting::degrees(&g);
        let d = ed(&g, &a, 2.0, &EdConfig::default()).unwrap();
        let report = verify_decomposition(&g, &a, &d, &Constants::default()).unwrap();
        assert_eq!(report.failures, 0);
        assert_eq!(report.unverified, 0);
        assert!(report.overhead.realized_beta.unwrap() <= report.overhead.beta_budget.unwrap());
    }

    #[test]
    fn heavy_nodes_below_the_root_replay_cleanly() {
        // grid(2,4) at phi = 1 produces a heavy node inside the recursion,
        // whose cut must be recounted in its own subgraph.
        let g = generators::grid(2, 4).unwrap();
        let a = NodeWeighting::degrees(&g);
        let d = ed(&g, &a, 1.0, &EdConfig::default()).unwrap();
        let report = verify_decomposition(&g, &a, &d, &Constants::default()).unwrap();
        assert_eq!(report.failures, 0);
    }

    #[test]
    fn tampered_cut_fails_integrity() {
        let g = generators::hypercube(3).unwrap();
        let a = NodeWeighting::degrees(&g);
        let mut d = ed(&g, &a, 2.0, &EdConfig::default()).unwrap();
        assert!(!d.removed.is_empty());
        d.removed.pop();
        d.components = g.components(&d.removed);
        let err = verify_decomposition(&g, &a, &d, &Constants::default()).unwrap_err();
        assert!(matches!(err, Error::Invariant { .. }));
    }
}
